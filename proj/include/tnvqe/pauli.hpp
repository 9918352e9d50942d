#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tnvqe/lattice.hpp"

namespace tnvqe {

using cplx = std::complex<double>;

// Real-weighted sum of Pauli strings over n qubits. Strings are stored as
// characters from {I, X, Y, Z}, character q acting on qubit q. Adding a
// string that is already present merges coefficients; terms whose merged
// coefficient is exactly zero are dropped.
class PauliSum {
 public:
  explicit PauliSum(int n_qubits);

  int n_qubits() const { return n_qubits_; }
  std::size_t size() const { return terms_.size(); }
  const std::map<std::string, double>& terms() const { return terms_; }

  void add(double coefficient, const std::string& ops);
  // Adds coefficient * (product of single-qubit ops), e.g. {{0,'Z'},{3,'Z'}}.
  void add(double coefficient, std::initializer_list<std::pair<int, char>> ops);
  PauliSum& operator+=(const PauliSum& other);

  double coefficient(const std::string& ops) const;

 private:
  int n_qubits_;
  std::map<std::string, double> terms_;
};

// Fermion-to-qubit mapping of the generalized Hubbard Hamiltonian:
//   -sum_b t_b sum_s (a+ a + h.c.) + sum_R mu_R n_R + U sum n_up n_dn
//   + V sum_<RR'> sum_{ss'} n_Rs n_R's'
// with a_p = Z_0 ... Z_{p-1} sigma^-_p and n = (I - Z)/2 (|1> occupied).
PauliSum jordan_wigner(const HubbardModel& model, const QubitLayout& layout);

// Total particle number sum_q (I - Z_q)/2.
PauliSum number_operator(int n_qubits);

// Dense 2^n x 2^n matrix. Qubit 0 is the most significant bit of the basis
// index, so Z_0 on two qubits is diag(1, 1, -1, -1).
Eigen::MatrixXcd dense_matrix(const PauliSum& h);

// True when every group of terms sharing a bit-flip pattern commutes with
// the total number operator.
bool conserves_particle_number(const PauliSum& h);

// Bit-mask form of a Pauli string for fast application on basis states.
// P|b> = coefficient * i^n_y * (-1)^popcount(b & z_mask) |b ^ x_mask>, where
// z_mask covers both Z and Y positions.
struct CompiledPauli {
  std::uint64_t x_mask = 0;
  std::uint64_t z_mask = 0;
  cplx factor;  // coefficient * i^n_y
};

struct CompiledPauliSum {
  int n_qubits = 0;
  std::vector<double> diagonal_coefficients;  // paired with diagonal_masks
  std::vector<std::uint64_t> diagonal_masks;
  std::vector<CompiledPauli> off_diagonal;
};

CompiledPauliSum compile(const PauliSum& h);

// Basis-index bit used for qubit q in an n-qubit register.
inline std::uint64_t qubit_bit(int n_qubits, int q) {
  return std::uint64_t{1} << (n_qubits - 1 - q);
}

// out = H * in over the full 2^n register.
void apply(const CompiledPauliSum& h, std::span<const cplx> in, std::span<cplx> out);

// <psi|H|psi> (complex; imaginary part is round-off for Hermitian H).
cplx expectation(const CompiledPauliSum& h, std::span<const cplx> psi);

}  // namespace tnvqe
