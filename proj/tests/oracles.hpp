#pragma once

// Reference constructions used only by the tests. They are deliberately
// naive (Kronecker products, full diagonalization) and share no code with
// the library beyond basic types.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

inline MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline MatrixXcd identity(int n_qubits) {
  return MatrixXcd::Identity(Eigen::Index{1} << n_qubits, Eigen::Index{1} << n_qubits);
}

inline MatrixXcd pauli_z() {
  MatrixXcd z(2, 2);
  z << 1, 0, 0, -1;
  return z;
}

// |0><1|: removes a particle from an occupied qubit.
inline MatrixXcd lowering() {
  MatrixXcd s = MatrixXcd::Zero(2, 2);
  s(0, 1) = 1.0;
  return s;
}

// Operator on qubit q of n, qubit 0 the leftmost Kronecker factor.
inline MatrixXcd embed1(const MatrixXcd& op, int q, int n) { return kron(kron(identity(q), op), identity(n - q - 1)); }

// Two-qubit operator on adjacent qubits (q, q+1).
inline MatrixXcd embed2(const MatrixXcd& op, int q, int n) { return kron(kron(identity(q), op), identity(n - q - 2)); }

// Jordan-Wigner annihilation operator a_p = Z ... Z sigma^-.
inline MatrixXcd annihilator(int p, int n) {
  MatrixXcd out = MatrixXcd::Identity(1, 1);
  for (int q = 0; q < n; ++q) {
    if (q < p) {
      out = kron(out, pauli_z());
    } else if (q == p) {
      out = kron(out, lowering());
    } else {
      out = kron(out, MatrixXcd::Identity(2, 2));
    }
  }
  return out;
}

inline MatrixXcd number(int p, int n) {
  const MatrixXcd a = annihilator(p, n);
  return a.adjoint() * a;
}

struct Bond {
  int i, j;
  double t;
};

// Hubbard Hamiltonian from explicit fermion matrices under the interleaved
// layout (site s: up = 2s, down = 2s+1).
inline MatrixXcd hubbard(int n_sites, const std::vector<Bond>& bonds, double u, double v,
                         const std::vector<double>& mu = {}) {
  const int n = 2 * n_sites;
  MatrixXcd h = MatrixXcd::Zero(Eigen::Index{1} << n, Eigen::Index{1} << n);
  for (const auto& b : bonds) {
    for (int s = 0; s < 2; ++s) {
      const MatrixXcd ai = annihilator(2 * b.i + s, n);
      const MatrixXcd aj = annihilator(2 * b.j + s, n);
      h -= b.t * (ai.adjoint() * aj + aj.adjoint() * ai);
    }
    const MatrixXcd ni = number(2 * b.i, n) + number(2 * b.i + 1, n);
    const MatrixXcd nj = number(2 * b.j, n) + number(2 * b.j + 1, n);
    h += v * ni * nj;
  }
  for (int s = 0; s < n_sites; ++s) {
    h += u * number(2 * s, n) * number(2 * s + 1, n);
    if (!mu.empty()) h += mu[s] * (number(2 * s, n) + number(2 * s + 1, n));
  }
  return h;
}

// Open nx-by-ny lattice, site (x, y) -> (x-1)*ny + (y-1); uniform t.
inline std::vector<Bond> square_bonds(int nx, int ny, double t = 1.0) {
  std::vector<Bond> out;
  for (int x = 0; x < nx; ++x) {
    for (int y = 0; y < ny; ++y) {
      const int s = x * ny + y;
      if (y + 1 < ny) out.push_back({s, s + 1, t});
      if (x + 1 < nx) out.push_back({s, s + ny, t});
    }
  }
  return out;
}

// Lowest eigenvalue of h restricted to basis states with the given numbers
// of even-position (up) and odd-position (down) particles.
inline double sector_ground_energy(const MatrixXcd& h, int n, int n_up, int n_dn) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index b = 0; b < h.rows(); ++b) {
    int up = 0, dn = 0;
    for (int q = 0; q < n; ++q) {
      if ((b >> (n - 1 - q)) & 1) ++(q % 2 == 0 ? up : dn);
    }
    if (up == n_up && dn == n_dn) idx.push_back(b);
  }
  MatrixXcd sub(idx.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = 0; j < idx.size(); ++j) sub(i, j) = h(idx[i], idx[j]);
  }
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(sub, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

// Free-fermion ground energy: fill the lowest single-particle levels of the
// hopping matrix with n_up and n_dn particles.
inline double free_fermion_energy(int n_sites, const std::vector<Bond>& bonds, int n_up, int n_dn) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n_sites, n_sites);
  for (const auto& b : bonds) {
    t(b.i, b.j) -= b.t;
    t(b.j, b.i) -= b.t;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
  const Eigen::VectorXd e = es.eigenvalues();
  return e.head(n_up).sum() + e.head(n_dn).sum();
}

inline VectorXcd random_state(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  VectorXcd v(Eigen::Index{1} << n);
  for (auto& x : v) x = cplx(g(rng), g(rng));
  return v.normalized();
}

inline Eigen::VectorXd random_params(int count, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::VectorXd v(count);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace oracle
