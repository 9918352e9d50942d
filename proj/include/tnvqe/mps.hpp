#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tnvqe/lattice.hpp"

namespace tnvqe {

using cplx = std::complex<double>;

// Rank-3 site tensor stored as one (left x right) matrix per physical state.
struct SiteTensor {
  std::array<Eigen::MatrixXcd, 2> m;

  Eigen::Index left() const { return m[0].rows(); }
  Eigen::Index right() const { return m[0].cols(); }
};

// 2^(n/2), the bond dimension that represents any n-qubit state exactly.
int full_bond_dimension(int n_qubits);

// Matrix product state of qubits 0..n-1 (qubit 0 leftmost). The tensors left
// of the orthogonality center are left isometries and those right of it are
// right isometries.
class MpsState {
 public:
  // Empty placeholder with no sites; assign a real state before use.
  MpsState() = default;

  // Computational basis state |occupations>.
  static MpsState product_state(const Occupation& occupations, int chi_max, double cutoff = 1e-12);

  // Successive-SVD factorization of a dense amplitude vector (qubit 0 is the
  // most significant bit of the index).
  static MpsState from_dense(const Eigen::VectorXcd& amplitudes, int chi_max, double cutoff = 1e-12);

  // Takes ownership of arbitrary tensors (boundary bonds must be 1) and brings
  // them into canonical form with the center on the last site; the state is
  // not normalized.
  static MpsState from_tensors(std::vector<SiteTensor> tensors, int chi_max, double cutoff);

  int n_qubits() const { return static_cast<int>(sites_.size()); }
  int chi_max() const { return chi_max_; }
  double cutoff() const { return cutoff_; }
  int center() const { return center_; }
  const SiteTensor& site(int i) const { return sites_.at(i); }
  // Dimension of bond k (between qubit k-1 and k), k = 0..n.
  std::vector<int> bond_dimensions() const;
  int max_bond_dimension() const;
  // Sum of squared singular values discarded by all truncations so far.
  double truncation_error() const { return truncation_error_; }

  void set_chi_max(int chi_max) { chi_max_ = chi_max; }
  void set_cutoff(double cutoff) { cutoff_ = cutoff; }

  void move_center(int site);

  // Single-qubit unitary; no bond dimension change.
  void apply_one_qubit_gate(int qubit, const Eigen::Matrix2cd& gate);

  // Unitary on chain-adjacent qubits; gate rows/cols are indexed by
  // 2*b(q1) + b(q2). Throws DomainError for non-adjacent qubits or a
  // non-unitary matrix.
  void apply_two_qubit_gate(int q1, int q2, const Eigen::Matrix4cd& gate);

  // Arbitrary (not necessarily unitary) two-qubit operator, no
  // renormalization after truncation.
  void apply_two_qubit_operator(int q1, int q2, const Eigen::Matrix4cd& op);

  // Arbitrary single-qubit operator.
  void apply_one_qubit_operator(int qubit, const Eigen::Matrix2cd& op);

  // Re-truncates every bond to (chi, cutoff) with a canonicalizing sweep.
  void truncate(int chi, double cutoff);

  void scale(cplx factor);
  void normalize();
  double norm_squared() const;

  cplx amplitude(const Occupation& bits) const;
  Eigen::VectorXcd to_dense() const;

  // Von Neumann entropy (natural log) across bond k, 1 <= k <= n-1.
  double entanglement_entropy(int bond) const;

  // Versioned binary checkpoint; round-trips bit-exactly.
  void save(std::ostream& out) const;
  static MpsState load(std::istream& in);
  void save(const std::string& path) const;
  static MpsState load(const std::string& path);

  friend bool operator==(const MpsState& a, const MpsState& b);

 private:
  void apply_two_site(int q1, int q2, const Eigen::Matrix4cd& op, bool renormalize);

  std::vector<SiteTensor> sites_;
  int chi_max_ = 1;
  double cutoff_ = 0.0;
  int center_ = 0;
  double truncation_error_ = 0.0;
};

// <a|b> by exact contraction.
cplx inner_product(const MpsState& a, const MpsState& b);

}  // namespace tnvqe
