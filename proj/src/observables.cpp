#include "tnvqe/observables.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "tnvqe/errors.hpp"
#include "tnvqe/pauli.hpp"

namespace tnvqe {

namespace {

using Eigen::MatrixXcd;

// L' = sum_s w_s A_s^dag L A_s
MatrixXcd push_left(const MatrixXcd& env, const SiteTensor& a, double w0, double w1) {
  return w0 * (a.m[0].adjoint() * env * a.m[0]) + w1 * (a.m[1].adjoint() * env * a.m[1]);
}

// R' = sum_s w_s A_s R A_s^dag
MatrixXcd push_right(const MatrixXcd& env, const SiteTensor& a, double w0, double w1) {
  return w0 * (a.m[0] * env * a.m[0].adjoint()) + w1 * (a.m[1] * env * a.m[1].adjoint());
}

double close(const MatrixXcd& left, const MatrixXcd& right) {
  // trace(L R) without forming the product
  return (left.transpose().cwiseProduct(right)).sum().real();
}

void check_sites(const QubitLayout& layout, int i, int j) {
  if (i < 0 || j < 0 || i >= layout.n_sites() || j >= layout.n_sites()) {
    throw DomainError(fmt::format("site pair ({}, {}) out of range", i, j));
  }
}

Eigen::MatrixXd correlation_from_zz(const Eigen::MatrixXd& zz, const Eigen::VectorXd& z, const QubitLayout& layout) {
  // S^z_i = (Z_dn - Z_up) / 4
  const int ns = layout.n_sites();
  Eigen::VectorXd sz(ns);
  for (int i = 0; i < ns; ++i) {
    sz[i] = 0.25 * (z[layout.qubit(i, Spin::Down)] - z[layout.qubit(i, Spin::Up)]);
  }
  Eigen::MatrixXd c(ns, ns);
  for (int i = 0; i < ns; ++i) {
    const int ui = layout.qubit(i, Spin::Up), di = layout.qubit(i, Spin::Down);
    for (int j = 0; j < ns; ++j) {
      const int uj = layout.qubit(j, Spin::Up), dj = layout.qubit(j, Spin::Down);
      const double szz = (zz(di, dj) - zz(di, uj) - zz(ui, dj) + zz(ui, uj)) / 16.0;
      c(i, j) = szz - sz[i] * sz[j];
    }
  }
  return c;
}

}  // namespace

Eigen::MatrixXd zz_matrix(const MpsState& psi, Eigen::VectorXd& z) {
  const int n = psi.n_qubits();
  if (n == 0) throw DomainError("empty state");
  std::vector<MatrixXcd> right(n + 1);
  right[n] = MatrixXcd::Identity(psi.site(n - 1).right(), psi.site(n - 1).right());
  for (int k = n - 1; k >= 0; --k) right[k] = push_right(right[k + 1], psi.site(k), 1.0, 1.0);
  MatrixXcd left = MatrixXcd::Identity(psi.site(0).left(), psi.site(0).left());
  const double norm = close(left, right[0]);
  if (!(norm > 0.0)) throw NumericalError("state has zero norm");

  Eigen::MatrixXd zz = Eigen::MatrixXd::Identity(n, n);
  z.resize(n);
  for (int p = 0; p < n; ++p) {
    MatrixXcd env = push_left(left, psi.site(p), 1.0, -1.0);
    z[p] = close(env, right[p + 1]) / norm;
    for (int q = p + 1; q < n; ++q) {
      zz(p, q) = zz(q, p) = close(push_left(env, psi.site(q), 1.0, -1.0), right[q + 1]) / norm;
      env = push_left(env, psi.site(q), 1.0, 1.0);
    }
    left = push_left(left, psi.site(p), 1.0, 1.0);
  }
  return zz;
}

Eigen::MatrixXd spin_correlation_matrix(const MpsState& psi, const QubitLayout& layout) {
  if (psi.n_qubits() != layout.n_qubits()) throw DomainError("state and layout sizes differ");
  Eigen::VectorXd z;
  const Eigen::MatrixXd zz = zz_matrix(psi, z);
  return correlation_from_zz(zz, z, layout);
}

Eigen::MatrixXd spin_correlation_matrix(const Eigen::VectorXcd& psi, const QubitLayout& layout) {
  const int n = layout.n_qubits();
  if (psi.size() != (Eigen::Index{1} << n)) throw DomainError("state and layout sizes differ");
  const double norm = psi.squaredNorm();
  if (!(norm > 0.0)) throw NumericalError("state has zero norm");
  const int ns = layout.n_sites();
  Eigen::VectorXd sz = Eigen::VectorXd::Zero(ns);
  Eigen::MatrixXd szz = Eigen::MatrixXd::Zero(ns, ns);
  Eigen::VectorXd local(ns);
  for (Eigen::Index b = 0; b < psi.size(); ++b) {
    const double p = std::norm(psi[b]);
    if (p == 0.0) continue;
    const auto bits = static_cast<std::uint64_t>(b);
    for (int i = 0; i < ns; ++i) {
      const bool up = bits & qubit_bit(n, layout.qubit(i, Spin::Up));
      const bool dn = bits & qubit_bit(n, layout.qubit(i, Spin::Down));
      local[i] = 0.5 * (static_cast<int>(up) - static_cast<int>(dn));
    }
    sz += p * local;
    szz += p * local * local.transpose();
  }
  sz /= norm;
  szz /= norm;
  return szz - sz * sz.transpose();
}

double spin_correlation(const MpsState& psi, const QubitLayout& layout, int i, int j) {
  check_sites(layout, i, j);
  return spin_correlation_matrix(psi, layout)(i, j);
}

double spin_correlation(const Eigen::VectorXcd& psi, const QubitLayout& layout, int i, int j) {
  check_sites(layout, i, j);
  return spin_correlation_matrix(psi, layout)(i, j);
}

namespace {

double clip_fidelity(double f) {
  if (f > 1.0 + 1e-10) throw NumericalError(fmt::format("fidelity {} exceeds one", f));
  return std::clamp(f, 0.0, 1.0);
}

}  // namespace

double fidelity(const MpsState& a, const MpsState& b) { return clip_fidelity(std::norm(inner_product(a, b))); }

double fidelity(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  if (a.size() != b.size()) throw DomainError("state sizes differ");
  return clip_fidelity(std::norm(a.dot(b)));
}

}  // namespace tnvqe
