#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "tnvqe/mps.hpp"
#include "tnvqe/pauli.hpp"

namespace tnvqe {

// Rank-4 MPO tensor: w[2*out + in] is the (left x right) matrix of virtual
// couplings for physical transition |in> -> |out>.
struct MpoSite {
  std::array<Eigen::MatrixXcd, 4> w;

  Eigen::Index left() const { return w[0].rows(); }
  Eigen::Index right() const { return w[0].cols(); }
  const Eigen::MatrixXcd& at(int out, int in) const { return w[2 * out + in]; }
};

class MpoOperator {
 public:
  explicit MpoOperator(std::vector<MpoSite> sites);

  int n_qubits() const { return static_cast<int>(sites_.size()); }
  const MpoSite& site(int i) const { return sites_.at(i); }
  std::vector<int> bond_dimensions() const;
  int max_bond_dimension() const;

 private:
  std::vector<MpoSite> sites_;
};

// Exact finite-state-machine MPO for a sum of Pauli strings. With compress,
// left and right SVD sweeps drop numerically null virtual directions.
MpoOperator mpo_from_pauli_sum(const PauliSum& h, bool compress = false);

// Full 2^n x 2^n matrix (qubit 0 most significant), n <= 14.
Eigen::MatrixXcd to_dense(const MpoOperator& op);

// <a|op|b> by environment contraction.
cplx matrix_element(const MpsState& a, const MpoOperator& op, const MpsState& b);

// Real part of <psi|op|psi>; throws NumericalError if the imaginary part of
// the raw contraction exceeds 1e-9.
double expectation(const MpsState& psi, const MpoOperator& op);

// op|psi>, re-truncated to (chi_max, cutoff).
MpsState apply_mpo(const MpoOperator& op, const MpsState& psi, int chi_max, double cutoff);

}  // namespace tnvqe
