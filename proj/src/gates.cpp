#include "tnvqe/gates.hpp"

#include <cmath>

namespace tnvqe {

namespace {
constexpr cplx kI{0.0, 1.0};
}

Eigen::Matrix4cd NpForm::matrix() const {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = c00;
  m(1, 1) = a;
  m(1, 2) = b;
  m(2, 1) = c;
  m(2, 2) = d;
  m(3, 3) = c11;
  return m;
}

NpForm NpForm::adjoint() const {
  return {std::conj(c00), std::conj(a), std::conj(c), std::conj(b), std::conj(d), std::conj(c11)};
}

NpForm np_form(double theta, double phi) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {1.0, c, kI * s, kI * s, c, std::exp(kI * phi)};
}

NpForm np_form_dtheta(double theta, double) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {0.0, -s, kI * c, kI * c, -s, 0.0};
}

NpForm np_form_dphi(double, double phi) {
  return {0.0, 0.0, 0.0, 0.0, 0.0, kI * std::exp(kI * phi)};
}

NpForm ep_form(double theta, double phi) {
  const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
  return {1.0, c, -kI * s, -kI * s, c, std::exp(-kI * phi)};
}

NpForm ep_form_dtheta(double theta, double) {
  const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
  return {0.0, -0.5 * s, -0.5 * kI * c, -0.5 * kI * c, -0.5 * s, 0.0};
}

NpForm ep_form_dphi(double, double phi) {
  return {0.0, 0.0, 0.0, 0.0, 0.0, -kI * std::exp(-kI * phi)};
}

NpForm fswap_form() { return {1.0, 0.0, 1.0, 1.0, 0.0, -1.0}; }

Eigen::Vector2cd rz_diagonal(double theta) {
  return {std::exp(-0.5 * kI * theta), std::exp(0.5 * kI * theta)};
}

Eigen::Vector2cd rz_diagonal_dtheta(double theta) {
  return {-0.5 * kI * std::exp(-0.5 * kI * theta), 0.5 * kI * std::exp(0.5 * kI * theta)};
}

}  // namespace tnvqe
