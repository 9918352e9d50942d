#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "tnvqe/circuit.hpp"
#include "tnvqe/lbfgs.hpp"
#include "tnvqe/mpo.hpp"
#include "tnvqe/mps.hpp"
#include "tnvqe/pauli.hpp"

namespace tnvqe {

enum class LossKind { Energy, Overlap };
enum class Backend { Auto, Dense, Mps };
enum class GradientMode { Analytic, FiniteDifference };

std::string to_string(LossKind loss);
LossKind loss_kind_from_string(const std::string& name);

// Infidelities below this floor are clamped, so the overlap loss is >= -16.
inline constexpr double kInfidelityFloor = 1e-16;
// Near F = 1 the overlap loss is limited by round-off in F itself, and line
// searches fail there. A failure at or below this loss still counts as a
// usable restart.
inline constexpr double kOverlapRoundoffLoss = -12.0;
// Auto backend switches from the dense statevector to MPS above this size.
inline constexpr int kDenseQubitLimit = 20;
inline constexpr double kFiniteDifferenceStep = 1e-5;

// log10(max(1 - F, kInfidelityFloor)).
double overlap_loss_from_fidelity(double fidelity);

struct OptimizationConfig {
  LossKind loss = LossKind::Energy;
  int restarts = 10;
  double init_variance = 1e-5;
  double energy_tol = 1e-7;
  double grad_tol = 1e-6;
  int max_steps = 1000;
  bool warm_start = true;
  std::uint64_t master_seed = 0;
  int lbfgs_memory = 10;
  Backend backend = Backend::Auto;
  int chi_max = 0;  // 0: exact, 2^(n_q/2)
  double cutoff = 1e-12;
  GradientMode gradient = GradientMode::Analytic;
  // Compare analytic and finite-difference gradients at every restart's
  // starting point; disagreement raises NumericalError.
  bool check_gradient = false;
  int workers = 1;

  void validate() const;
};

nlohmann::json to_json(const OptimizationConfig& config);

// Loss, energy and gradient evaluation for one circuit, initial basis state
// and Hamiltonian. Thread-safe for concurrent const use.
class VqeProblem {
 public:
  VqeProblem(Circuit circuit, Occupation initial, const PauliSum& hamiltonian, LossKind loss,
             std::optional<MpsState> reference, Backend backend, int chi_max, double cutoff);

  const Circuit& circuit() const { return circuit_; }
  LossKind loss_kind() const { return loss_; }
  bool dense() const { return dense_; }
  int chi_max() const { return chi_; }

  double energy(const Eigen::VectorXd& params) const;
  double loss(const Eigen::VectorXd& params) const;
  double loss_and_gradient(const Eigen::VectorXd& params, Eigen::VectorXd& grad) const;
  Eigen::VectorXd finite_difference_gradient(const Eigen::VectorXd& params,
                                             double step = kFiniteDifferenceStep) const;
  // |<reference|psi(params)>|^2; requires a reference.
  double fidelity(const Eigen::VectorXd& params) const;
  bool has_reference() const { return reference_.has_value(); }

  MpsState state(const Eigen::VectorXd& params) const;

 private:
  Circuit circuit_;
  Occupation initial_;
  LossKind loss_;
  bool dense_;
  int chi_;
  double cutoff_;
  CompiledPauliSum h_dense_;
  std::optional<MpoOperator> h_mpo_;
  std::optional<MpsState> reference_;
  Eigen::VectorXcd reference_dense_;
  Eigen::VectorXcd initial_dense_;
  MpsState initial_mps_;
};

// Component-wise agreement |a - b| <= rel * max(|b|, 1e-3). The floor covers
// round-off in the central difference itself: MPS energies carry ~1e-14
// absolute error, which a 1e-5 step turns into ~1e-9 on vanishing components.
bool gradients_agree(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric, double rel = 1e-5);

// E(theta) = <psi(theta)|H|psi(theta)> on the MPS path.
double energy_loss(const Eigen::VectorXd& params, const Circuit& circuit, const MpsState& initial,
                   const MpoOperator& h);
// log10 of the clamped infidelity against `reference`.
double overlap_loss(const Eigen::VectorXd& params, const Circuit& circuit, const MpsState& initial,
                    const MpsState& reference);

struct RestartRecord {
  int index = 0;
  std::uint64_t seed = 0;
  double final_loss = 0.0;
  double final_energy = 0.0;
  std::optional<double> fidelity;
  Termination termination = Termination::MaxSteps;
  int steps = 0;
  int evaluations = 0;
  std::optional<double> warm_energy;
  std::optional<Termination> warm_termination;
  int warm_steps = 0;
  std::vector<std::pair<int, double>> trace;
  Eigen::VectorXd params;
  double wall_time = 0.0;
};

struct VqeResult {
  std::vector<RestartRecord> restarts;
  bool valid = false;
  int best_index = -1;
  double best_energy = 0.0;
  Eigen::VectorXd best_params;
  std::string best_state_path;  // set when the best state has been written out
  int n_parameters = 0;
  AnsatzDescriptor ansatz;
  OptimizationConfig config;
};

nlohmann::json to_json(const VqeResult& result);

// Restart seed r = derive_seed(master, r); theta_0 ~ N(0, init_variance);
// optional warm start on the U = V = d = 0 model (uniform t); then the target
// loss. The final energy is always evaluated. Best = lowest energy, ties to
// the lowest restart index.
VqeResult run_vqe(const HubbardModel& model, AnsatzFamily family, int layers, const OptimizationConfig& config,
                  const std::optional<MpsState>& reference = std::nullopt);

}  // namespace tnvqe
