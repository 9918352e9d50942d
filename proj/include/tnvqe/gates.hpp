#pragma once

#include <complex>

#include <Eigen/Dense>

namespace tnvqe {

using cplx = std::complex<double>;

// Two-qubit matrix with the number-preserving sparsity pattern
//   [ c00  0   0   0  ]
//   [ 0    a   b   0  ]
//   [ 0    c   d   0  ]
//   [ 0    0   0  c11 ]
// in the basis |b1 b2> ordered 00, 01, 10, 11. Derivatives of the NP and EP
// gates keep this pattern, so the dense backend works on it directly.
struct NpForm {
  cplx c00{1.0}, a{1.0}, b{0.0}, c{0.0}, d{1.0}, c11{1.0};

  Eigen::Matrix4cd matrix() const;
  NpForm adjoint() const;
};

NpForm np_form(double theta, double phi);
NpForm np_form_dtheta(double theta, double phi);
NpForm np_form_dphi(double theta, double phi);

NpForm ep_form(double theta, double phi);
NpForm ep_form_dtheta(double theta, double phi);
NpForm ep_form_dphi(double theta, double phi);

NpForm fswap_form();

// diag(e^{-i theta/2}, e^{i theta/2}) and its derivative.
Eigen::Vector2cd rz_diagonal(double theta);
Eigen::Vector2cd rz_diagonal_dtheta(double theta);

inline Eigen::Matrix4cd np_gate(double theta, double phi) { return np_form(theta, phi).matrix(); }
inline Eigen::Matrix4cd ep_gate(double theta, double phi) { return ep_form(theta, phi).matrix(); }
inline Eigen::Matrix4cd fswap() { return fswap_form().matrix(); }
inline Eigen::Matrix2cd rz(double theta) { return rz_diagonal(theta).asDiagonal(); }

}  // namespace tnvqe
