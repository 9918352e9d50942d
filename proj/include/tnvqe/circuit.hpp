#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tnvqe/lattice.hpp"
#include "tnvqe/mps.hpp"
#include "tnvqe/statevector.hpp"

namespace tnvqe {

enum class GateKind { RZ, NP, EP, FSWAP, UCC_FACTOR };

std::string to_string(GateKind kind);

struct GateOp {
  GateKind kind = GateKind::RZ;
  std::vector<int> qubits;  // 1 for RZ, 2 for NP/EP/FSWAP, all touched qubits for UCC_FACTOR
  std::vector<int> slots;   // RZ: {theta}; NP/EP: {theta, phi}; UCC_FACTOR: {theta}
  Excitation excitation;    // UCC_FACTOR only
};

enum class AnsatzFamily { NP, EP, UCCSD };

std::string to_string(AnsatzFamily family);
AnsatzFamily ansatz_family_from_string(const std::string& name);

struct AnsatzDescriptor {
  AnsatzFamily family = AnsatzFamily::NP;
  int layers = 0;  // 0 for UCCSD
  int nx = 0;
  int ny = 0;
};

class Circuit {
 public:
  Circuit(int n_qubits, std::vector<GateOp> ops, int n_parameters, AnsatzDescriptor descriptor);

  int n_qubits() const { return n_qubits_; }
  int n_parameters() const { return n_parameters_; }
  const std::vector<GateOp>& ops() const { return ops_; }
  const AnsatzDescriptor& descriptor() const { return descriptor_; }

 private:
  int n_qubits_;
  std::vector<GateOp> ops_;
  int n_parameters_;
  AnsatzDescriptor descriptor_;
};

int np_parameter_count(int nx, int ny, int layers);
int ep_parameter_count(int nx, int ny, int layers);

// Global R_z prelude, then `layers` layers of NP gates in the order H_o,
// H_h1, H_v1, H_h2, H_v2: on-site pairs, horizontal bonds starting at odd y,
// vertical bonds starting at odd x, then the even-y and even-x bonds. Pairs
// that are not chain-adjacent are routed with FSWAP chains that are undone
// afterwards. Always uses the interleaved qubit layout.
Circuit build_np_ansatz(const LatticeGeometry& geometry, int layers);

// R_z layer, `layers` layers of EP gates on (0,1), (1,2), ..., R_z layer.
Circuit build_ep_ansatz(const LatticeGeometry& geometry, int layers);

// Spin-conserving singles and doubles relative to `reference`, singles first.
std::vector<Excitation> uccsd_excitations(const Occupation& reference, const QubitLayout& layout);
int uccsd_parameter_count(const Occupation& reference, const QubitLayout& layout);

// Qubit budget for the exact-factor UCC backend.
inline constexpr int kUccQubitBudget = 16;

// Throws CapabilityError above kUccQubitBudget qubits.
Circuit build_uccsd_ansatz(const LatticeGeometry& geometry, const Occupation& reference);

Circuit build_ansatz(AnsatzFamily family, const LatticeGeometry& geometry, int layers);

// Line-oriented dump: header, then "<kind> q... | s..." per gate.
std::string to_text(const Circuit& circuit);

// Gates applied in order on a copy of `initial`.
MpsState evaluate(const Circuit& circuit, const Eigen::VectorXd& params, const MpsState& initial);
Eigen::VectorXcd evaluate_dense(const Circuit& circuit, const Eigen::VectorXd& params,
                                const Eigen::VectorXcd& initial);

// g_k = 2 Re <lambda|d psi/d theta_k>, where psi is the circuit output at
// `params` and lambda is a fixed vector.
// With lambda = H psi this is the energy gradient; with lambda =
// ref <ref|psi> it is the gradient of |<ref|psi>|^2. Uses one reverse sweep.
Eigen::VectorXd adjoint_gradient_dense(const Circuit& circuit, const Eigen::VectorXd& params,
                                       Eigen::VectorXcd psi, Eigen::VectorXcd lambda);
Eigen::VectorXd adjoint_gradient_mps(const Circuit& circuit, const Eigen::VectorXd& params,
                                     MpsState psi, MpsState lambda);

}  // namespace tnvqe
