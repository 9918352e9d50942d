#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "tnvqe/gates.hpp"
#include "tnvqe/lattice.hpp"

namespace tnvqe {

// Dense 2^n amplitude vectors; qubit 0 is the most significant index bit.
namespace dense {

Eigen::VectorXcd basis_state(const Occupation& bits);

void apply_diagonal(Eigen::VectorXcd& psi, int n_qubits, int q, const Eigen::Vector2cd& diag);
void apply_one_qubit(Eigen::VectorXcd& psi, int n_qubits, int q, const Eigen::Matrix2cd& m);
void apply_np_form(Eigen::VectorXcd& psi, int n_qubits, int q1, int q2, const NpForm& g);
// General 4x4 operator; rows/cols indexed by 2*b(q1) + b(q2).
void apply_two_qubit(Eigen::VectorXcd& psi, int n_qubits, int q1, int q2, const Eigen::Matrix4cd& m);

// <lambda| G |psi> without forming G|psi>.
cplx sandwich_diagonal(const Eigen::VectorXcd& lambda, const Eigen::VectorXcd& psi, int n_qubits,
                       int q, const Eigen::Vector2cd& diag);
cplx sandwich_np_form(const Eigen::VectorXcd& lambda, const Eigen::VectorXcd& psi, int n_qubits,
                      int q1, int q2, const NpForm& g);

}  // namespace dense

// Fermionic excitation operator tau = a+_{v1} a+_{v2} ... a_{o2} a_{o1}
// (annihilations applied first, in listed order) over Jordan-Wigner qubits.
struct Excitation {
  std::vector<int> occupied;
  std::vector<int> virtuals;

  friend bool operator==(const Excitation&, const Excitation&) = default;
};

namespace dense {

// psi <- exp(theta (tau - tau^+)) psi, applied exactly: the generator pairs
// each basis state it connects, so the factor is a set of plane rotations.
void apply_excitation(Eigen::VectorXcd& psi, int n_qubits, const Excitation& ex, double theta);

// <lambda| (tau - tau^+) |psi>.
cplx sandwich_excitation_generator(const Eigen::VectorXcd& lambda, const Eigen::VectorXcd& psi,
                                   int n_qubits, const Excitation& ex);

}  // namespace dense

}  // namespace tnvqe
