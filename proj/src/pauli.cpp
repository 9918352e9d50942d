#include "tnvqe/pauli.hpp"

#include <algorithm>
#include <bit>

#include <fmt/format.h>

#include "tnvqe/errors.hpp"

namespace tnvqe {

PauliSum::PauliSum(int n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 1 || n_qubits > 64) {
    throw DomainError(fmt::format("unsupported qubit count {}", n_qubits));
  }
}

void PauliSum::add(double coefficient, const std::string& ops) {
  if (static_cast<int>(ops.size()) != n_qubits_) {
    throw DomainError(fmt::format("Pauli string '{}' has wrong length", ops));
  }
  for (char c : ops) {
    if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
      throw DomainError(fmt::format("invalid Pauli symbol '{}'", c));
    }
  }
  if (coefficient == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(ops, coefficient);
  if (!inserted) {
    it->second += coefficient;
    if (it->second == 0.0) terms_.erase(it);
  }
}

void PauliSum::add(double coefficient, std::initializer_list<std::pair<int, char>> ops) {
  std::string s(n_qubits_, 'I');
  for (auto [q, c] : ops) {
    if (q < 0 || q >= n_qubits_) throw DomainError("qubit index out of range");
    s[q] = c;
  }
  add(coefficient, s);
}

PauliSum& PauliSum::operator+=(const PauliSum& other) {
  if (other.n_qubits_ != n_qubits_) throw DomainError("PauliSum size mismatch");
  for (const auto& [s, c] : other.terms_) add(c, s);
  return *this;
}

double PauliSum::coefficient(const std::string& ops) const {
  auto it = terms_.find(ops);
  return it == terms_.end() ? 0.0 : it->second;
}

namespace {

void add_density_density(PauliSum& h, double w, int a, int b) {
  // w * n_a n_b = w/4 (I - Z_a - Z_b + Z_a Z_b)
  h.add(0.25 * w, std::string(h.n_qubits(), 'I'));
  h.add(-0.25 * w, {{a, 'Z'}});
  h.add(-0.25 * w, {{b, 'Z'}});
  h.add(0.25 * w, {{a, 'Z'}, {b, 'Z'}});
}

void add_hopping(PauliSum& h, double amplitude, int p, int q) {
  // amplitude * (a+_p a_q + a+_q a_p) = amplitude/2 (X Z..Z X + Y Z..Z Y)
  if (p > q) std::swap(p, q);
  std::string xx(h.n_qubits(), 'I');
  for (int k = p + 1; k < q; ++k) xx[k] = 'Z';
  std::string yy = xx;
  xx[p] = xx[q] = 'X';
  yy[p] = yy[q] = 'Y';
  h.add(0.5 * amplitude, xx);
  h.add(0.5 * amplitude, yy);
}

}  // namespace

PauliSum jordan_wigner(const HubbardModel& model, const QubitLayout& layout) {
  const auto& geo = model.geometry;
  if (layout.n_sites() != geo.n_sites()) {
    throw DomainError("layout does not cover model geometry");
  }
  if (model.hopping.size() != geo.bonds().size() ||
      static_cast<int>(model.chemical_potential.size()) != geo.n_sites()) {
    throw DomainError("model tables do not match geometry");
  }
  PauliSum h(geo.n_qubits());
  constexpr Spin spins[] = {Spin::Up, Spin::Down};
  for (std::size_t i = 0; i < geo.bonds().size(); ++i) {
    const auto& b = geo.bonds()[i];
    for (Spin s : spins) {
      add_hopping(h, -model.hopping[i], layout.qubit(b.first, s), layout.qubit(b.second, s));
    }
  }
  for (int r = 0; r < geo.n_sites(); ++r) {
    const double mu = model.chemical_potential[r];
    if (mu != 0.0) {
      for (Spin s : spins) {
        const int q = layout.qubit(r, s);
        h.add(0.5 * mu, std::string(h.n_qubits(), 'I'));
        h.add(-0.5 * mu, {{q, 'Z'}});
      }
    }
    if (model.u != 0.0) {
      add_density_density(h, model.u, layout.qubit(r, Spin::Up), layout.qubit(r, Spin::Down));
    }
  }
  if (model.v != 0.0) {
    for (const auto& b : geo.bonds()) {
      for (Spin s1 : spins) {
        for (Spin s2 : spins) {
          add_density_density(h, model.v, layout.qubit(b.first, s1), layout.qubit(b.second, s2));
        }
      }
    }
  }
  return h;
}

PauliSum number_operator(int n_qubits) {
  PauliSum n(n_qubits);
  for (int q = 0; q < n_qubits; ++q) {
    n.add(0.5, std::string(n_qubits, 'I'));
    n.add(-0.5, {{q, 'Z'}});
  }
  return n;
}

CompiledPauliSum compile(const PauliSum& h) {
  CompiledPauliSum out;
  out.n_qubits = h.n_qubits();
  const int n = h.n_qubits();
  for (const auto& [ops, c] : h.terms()) {
    CompiledPauli p;
    int n_y = 0;
    for (int q = 0; q < n; ++q) {
      const auto bit = qubit_bit(n, q);
      switch (ops[q]) {
        case 'X': p.x_mask |= bit; break;
        case 'Y': p.x_mask |= bit; p.z_mask |= bit; ++n_y; break;
        case 'Z': p.z_mask |= bit; break;
        default: break;
      }
    }
    static constexpr cplx kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    p.factor = c * kIPow[n_y % 4];
    if (p.x_mask == 0) {
      out.diagonal_coefficients.push_back(c);
      out.diagonal_masks.push_back(p.z_mask);
    } else {
      out.off_diagonal.push_back(p);
    }
  }
  return out;
}

namespace {

inline double parity_sign(std::uint64_t v) { return (std::popcount(v) & 1) ? -1.0 : 1.0; }

}  // namespace

void apply(const CompiledPauliSum& h, std::span<const cplx> in, std::span<cplx> out) {
  const std::uint64_t dim = std::uint64_t{1} << h.n_qubits;
  if (in.size() != dim || out.size() != dim) throw DomainError("vector size mismatch");
  const std::size_t nd = h.diagonal_masks.size();
  for (std::uint64_t b = 0; b < dim; ++b) {
    double diag = 0.0;
    for (std::size_t k = 0; k < nd; ++k) {
      diag += h.diagonal_coefficients[k] * parity_sign(b & h.diagonal_masks[k]);
    }
    cplx acc = diag * in[b];
    for (const auto& p : h.off_diagonal) {
      const std::uint64_t src = b ^ p.x_mask;
      acc += p.factor * parity_sign(src & p.z_mask) * in[src];
    }
    out[b] = acc;
  }
}

cplx expectation(const CompiledPauliSum& h, std::span<const cplx> psi) {
  std::vector<cplx> hpsi(psi.size());
  apply(h, psi, hpsi);
  cplx acc = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) acc += std::conj(psi[i]) * hpsi[i];
  return acc;
}

Eigen::MatrixXcd dense_matrix(const PauliSum& h) {
  if (h.n_qubits() > 14) {
    throw CapabilityError(fmt::format("dense matrix of {} qubits exceeds budget", h.n_qubits()));
  }
  const auto c = compile(h);
  const std::uint64_t dim = std::uint64_t{1} << h.n_qubits();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::uint64_t col = 0; col < dim; ++col) {
    for (std::size_t k = 0; k < c.diagonal_masks.size(); ++k) {
      m(col, col) += c.diagonal_coefficients[k] * parity_sign(col & c.diagonal_masks[k]);
    }
    for (const auto& p : c.off_diagonal) {
      m(col ^ p.x_mask, col) += p.factor * parity_sign(col & p.z_mask);
    }
  }
  return m;
}

bool conserves_particle_number(const PauliSum& h) {
  const auto c = compile(h);
  // Group by (flip pattern, sign string outside the flipped bits).
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::vector<const CompiledPauli*>> groups;
  for (const auto& p : c.off_diagonal) {
    groups[{p.x_mask, p.z_mask & ~p.x_mask}].push_back(&p);
  }
  for (const auto& [key, members] : groups) {
    const std::uint64_t flip = key.first;
    const int k = std::popcount(flip);
    if (k > 20) return false;
    std::vector<int> positions;
    for (int b = 0; b < 64; ++b) {
      if (flip >> b & 1) positions.push_back(b);
    }
    for (std::uint64_t local = 0; local < (std::uint64_t{1} << k); ++local) {
      std::uint64_t state = 0;
      for (int i = 0; i < k; ++i) {
        if (local >> i & 1) state |= std::uint64_t{1} << positions[i];
      }
      // Flipping changes the particle number unless exactly half the
      // flipped bits are occupied.
      if (2 * std::popcount(state) == k) continue;
      cplx amp = 0.0;
      for (const auto* p : members) amp += p->factor * parity_sign(state & p->z_mask);
      if (std::abs(amp) > 1e-14) return false;
    }
  }
  return true;
}

}  // namespace tnvqe
