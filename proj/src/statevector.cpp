#include "tnvqe/statevector.hpp"

#include <bit>
#include <cmath>
#include <cstdint>

#include "tnvqe/errors.hpp"
#include "tnvqe/pauli.hpp"

namespace tnvqe {

namespace dense {

namespace {

void check_size(const Eigen::VectorXcd& psi, int n_qubits) {
  if (n_qubits < 1 || n_qubits > 30 || psi.size() != (Eigen::Index{1} << n_qubits)) {
    throw DomainError("state vector size does not match qubit count");
  }
}

void check_pair(int n_qubits, int q1, int q2) {
  if (q1 < 0 || q2 < 0 || q1 >= n_qubits || q2 >= n_qubits || q1 == q2) {
    throw DomainError("invalid qubit pair");
  }
}

// Calls f(i00, i01, i10, i11) for every block of four amplitudes that differ
// only in the bits of q1 (high index digit) and q2.
template <typename F>
void for_each_quad(int n_qubits, int q1, int q2, F&& f) {
  const std::uint64_t m1 = qubit_bit(n_qubits, q1);
  const std::uint64_t m2 = qubit_bit(n_qubits, q2);
  const std::uint64_t lo = std::min(m1, m2), hi = std::max(m1, m2);
  const std::uint64_t quarter = (std::uint64_t{1} << n_qubits) >> 2;
  for (std::uint64_t k = 0; k < quarter; ++k) {
    // Insert zero bits at the positions of lo and hi.
    std::uint64_t i = k;
    i = ((i & ~(lo - 1)) << 1) | (i & (lo - 1));
    i = ((i & ~(hi - 1)) << 1) | (i & (hi - 1));
    f(i, i | m2, i | m1, i | m1 | m2);
  }
}

template <typename F>
void for_each_pair(int n_qubits, int q, F&& f) {
  const std::uint64_t m = qubit_bit(n_qubits, q);
  const std::uint64_t half = (std::uint64_t{1} << n_qubits) >> 1;
  for (std::uint64_t k = 0; k < half; ++k) {
    const std::uint64_t i = ((k & ~(m - 1)) << 1) | (k & (m - 1));
    f(i, i | m);
  }
}

}  // namespace

Eigen::VectorXcd basis_state(const Occupation& bits) {
  const int n = static_cast<int>(bits.size());
  if (n < 1 || n > 30) throw DomainError("unsupported qubit count for dense state");
  std::uint64_t index = 0;
  for (int q = 0; q < n; ++q) {
    if (bits[q]) index |= qubit_bit(n, q);
  }
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(Eigen::Index{1} << n);
  psi(static_cast<Eigen::Index>(index)) = 1.0;
  return psi;
}

void apply_diagonal(Eigen::VectorXcd& psi, int n_qubits, int q, const Eigen::Vector2cd& diag) {
  check_size(psi, n_qubits);
  for_each_pair(n_qubits, q, [&](std::uint64_t i0, std::uint64_t i1) {
    psi[i0] *= diag[0];
    psi[i1] *= diag[1];
  });
}

void apply_one_qubit(Eigen::VectorXcd& psi, int n_qubits, int q, const Eigen::Matrix2cd& m) {
  check_size(psi, n_qubits);
  for_each_pair(n_qubits, q, [&](std::uint64_t i0, std::uint64_t i1) {
    const cplx a = psi[i0], b = psi[i1];
    psi[i0] = m(0, 0) * a + m(0, 1) * b;
    psi[i1] = m(1, 0) * a + m(1, 1) * b;
  });
}

void apply_np_form(Eigen::VectorXcd& psi, int n_qubits, int q1, int q2, const NpForm& g) {
  check_size(psi, n_qubits);
  check_pair(n_qubits, q1, q2);
  for_each_quad(n_qubits, q1, q2, [&](std::uint64_t i00, std::uint64_t i01, std::uint64_t i10, std::uint64_t i11) {
    const cplx x = psi[i01], y = psi[i10];
    psi[i00] *= g.c00;
    psi[i01] = g.a * x + g.b * y;
    psi[i10] = g.c * x + g.d * y;
    psi[i11] *= g.c11;
  });
}

void apply_two_qubit(Eigen::VectorXcd& psi, int n_qubits, int q1, int q2, const Eigen::Matrix4cd& m) {
  check_size(psi, n_qubits);
  check_pair(n_qubits, q1, q2);
  for_each_quad(n_qubits, q1, q2, [&](std::uint64_t i00, std::uint64_t i01, std::uint64_t i10, std::uint64_t i11) {
    const Eigen::Vector4cd v(psi[i00], psi[i01], psi[i10], psi[i11]);
    const Eigen::Vector4cd w = m * v;
    psi[i00] = w[0];
    psi[i01] = w[1];
    psi[i10] = w[2];
    psi[i11] = w[3];
  });
}

cplx sandwich_diagonal(const Eigen::VectorXcd& lambda, const Eigen::VectorXcd& psi, int n_qubits,
                       int q, const Eigen::Vector2cd& diag) {
  check_size(psi, n_qubits);
  check_size(lambda, n_qubits);
  cplx s0 = 0.0, s1 = 0.0;
  for_each_pair(n_qubits, q, [&](std::uint64_t i0, std::uint64_t i1) {
    s0 += std::conj(lambda[i0]) * psi[i0];
    s1 += std::conj(lambda[i1]) * psi[i1];
  });
  return diag[0] * s0 + diag[1] * s1;
}

cplx sandwich_np_form(const Eigen::VectorXcd& lambda, const Eigen::VectorXcd& psi, int n_qubits,
                      int q1, int q2, const NpForm& g) {
  check_size(psi, n_qubits);
  check_size(lambda, n_qubits);
  check_pair(n_qubits, q1, q2);
  cplx acc = 0.0;
  for_each_quad(n_qubits, q1, q2, [&](std::uint64_t i00, std::uint64_t i01, std::uint64_t i10, std::uint64_t i11) {
    const cplx x = psi[i01], y = psi[i10];
    acc += std::conj(lambda[i00]) * (g.c00 * psi[i00]) + std::conj(lambda[i01]) * (g.a * x + g.b * y) +
           std::conj(lambda[i10]) * (g.c * x + g.d * y) + std::conj(lambda[i11]) * (g.c11 * psi[i11]);
  });
  return acc;
}

namespace {

struct ExcitationMasks {
  std::uint64_t occupied = 0;
  std::uint64_t virtuals = 0;
};

ExcitationMasks excitation_masks(int n_qubits, const Excitation& ex) {
  if (ex.occupied.empty() || ex.occupied.size() != ex.virtuals.size()) {
    throw DomainError("excitation needs matching non-empty index lists");
  }
  ExcitationMasks m;
  for (int q : ex.occupied) {
    if (q < 0 || q >= n_qubits || (m.occupied & qubit_bit(n_qubits, q))) throw DomainError("bad occupied index");
    m.occupied |= qubit_bit(n_qubits, q);
  }
  for (int q : ex.virtuals) {
    if (q < 0 || q >= n_qubits || (m.virtuals & qubit_bit(n_qubits, q))) throw DomainError("bad virtual index");
    m.virtuals |= qubit_bit(n_qubits, q);
  }
  if (m.occupied & m.virtuals) throw DomainError("occupied and virtual indices overlap");
  return m;
}

// Applies tau to basis state `b` (which must have all occupied bits set and
// all virtual bits clear); returns the sign and writes the target index.
double excite(int n_qubits, const Excitation& ex, std::uint64_t b, std::uint64_t& target) {
  int parity = 0;
  auto before = [n_qubits](int q) {
    // Bits of qubits 0..q-1, which are more significant than qubit q's bit.
    const std::uint64_t bit = qubit_bit(n_qubits, q);
    const std::uint64_t full = (n_qubits == 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << n_qubits) - 1);
    return full & ~((bit << 1) - 1);
  };
  for (int q : ex.occupied) {
    parity += std::popcount(b & before(q));
    b &= ~qubit_bit(n_qubits, q);
  }
  for (auto it = ex.virtuals.rbegin(); it != ex.virtuals.rend(); ++it) {
    parity += std::popcount(b & before(*it));
    b |= qubit_bit(n_qubits, *it);
  }
  target = b;
  return (parity & 1) ? -1.0 : 1.0;
}

}  // namespace

void apply_excitation(Eigen::VectorXcd& psi, int n_qubits, const Excitation& ex, double theta) {
  check_size(psi, n_qubits);
  const auto masks = excitation_masks(n_qubits, ex);
  const double c = std::cos(theta), s = std::sin(theta);
  const std::uint64_t dim = std::uint64_t{1} << n_qubits;
  for (std::uint64_t b = 0; b < dim; ++b) {
    if ((b & masks.occupied) != masks.occupied || (b & masks.virtuals) != 0) continue;
    std::uint64_t t = 0;
    const double sign = excite(n_qubits, ex, b, t);
    const cplx pb = psi[b], pt = psi[t];
    psi[b] = c * pb - sign * s * pt;
    psi[t] = sign * s * pb + c * pt;
  }
}

cplx sandwich_excitation_generator(const Eigen::VectorXcd& lambda, const Eigen::VectorXcd& psi,
                                   int n_qubits, const Excitation& ex) {
  check_size(psi, n_qubits);
  check_size(lambda, n_qubits);
  const auto masks = excitation_masks(n_qubits, ex);
  const std::uint64_t dim = std::uint64_t{1} << n_qubits;
  cplx acc = 0.0;
  for (std::uint64_t b = 0; b < dim; ++b) {
    if ((b & masks.occupied) != masks.occupied || (b & masks.virtuals) != 0) continue;
    std::uint64_t t = 0;
    const double sign = excite(n_qubits, ex, b, t);
    acc += sign * (std::conj(lambda[t]) * psi[b] - std::conj(lambda[b]) * psi[t]);
  }
  return acc;
}

}  // namespace dense

}  // namespace tnvqe
