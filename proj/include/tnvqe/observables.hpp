#pragma once

#include <Eigen/Dense>

#include "tnvqe/lattice.hpp"
#include "tnvqe/mps.hpp"

namespace tnvqe {

// Connected correlator <S^z_i S^z_j> - <S^z_i><S^z_j>, S^z = (n_up - n_down)/2.
// Sites are 0-based. The state need not be normalized.
double spin_correlation(const MpsState& psi, const QubitLayout& layout, int i, int j);
double spin_correlation(const Eigen::VectorXcd& psi, const QubitLayout& layout, int i, int j);

// All pairs at once; symmetric n_sites x n_sites.
Eigen::MatrixXd spin_correlation_matrix(const MpsState& psi, const QubitLayout& layout);
Eigen::MatrixXd spin_correlation_matrix(const Eigen::VectorXcd& psi, const QubitLayout& layout);

// <Z_p Z_q> for all qubit pairs (diagonal: 1) and <Z_q> in `z`, normalized.
Eigen::MatrixXd zz_matrix(const MpsState& psi, Eigen::VectorXd& z);

// |<a|b>|^2. Values above 1 + 1e-10 raise NumericalError; the result is
// clipped to [0, 1].
double fidelity(const MpsState& a, const MpsState& b);
double fidelity(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);

}  // namespace tnvqe
