#include "tnvqe/ed.hpp"

#include <bit>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "tnvqe/errors.hpp"
#include "tnvqe/linalg.hpp"
#include "tnvqe/rng.hpp"

namespace tnvqe {

SectorBasis::SectorBasis(int n_qubits, const std::vector<int>& species, int count0, int count1)
    : n_qubits_(n_qubits) {
  if (n_qubits < 1 || n_qubits > 62 || static_cast<int>(species.size()) != n_qubits) {
    throw DomainError("species labels do not match qubit count");
  }
  for (int q = 0; q < n_qubits; ++q) {
    if (species[q] != 0 && species[q] != 1) throw DomainError("species label must be 0 or 1");
    bits_[species[q]].push_back(qubit_bit(n_qubits, q));
  }
  const int counts[2] = {count0, count1};
  std::array<std::vector<std::uint64_t>, 2> patterns;
  for (int s = 0; s < 2; ++s) {
    const int m = static_cast<int>(bits_[s].size());
    if (counts[s] < 0 || counts[s] > m) throw DomainError("sector occupation out of range");
    if (m > 24) throw CapabilityError("species has too many qubits");
    rank_[s].assign(std::size_t{1} << m, -1);
    // Increasing local masks with fixed popcount are in colex order.
    for (std::uint64_t local = 0; local < (std::uint64_t{1} << m); ++local) {
      if (std::popcount(local) != counts[s]) continue;
      rank_[s][local] = static_cast<std::int32_t>(patterns[s].size());
      std::uint64_t global = 0;
      for (int k = 0; k < m; ++k) {
        if (local >> k & 1) global |= bits_[s][k];
      }
      patterns[s].push_back(global);
    }
    dims_[s] = patterns[s].size();
  }
  states_.reserve(dims_[0] * dims_[1]);
  for (auto a : patterns[0]) {
    for (auto b : patterns[1]) states_.push_back(a | b);
  }
}

std::int64_t SectorBasis::index(std::uint64_t bits) const {
  std::int64_t r[2];
  for (int s = 0; s < 2; ++s) {
    std::uint64_t local = 0;
    for (std::size_t k = 0; k < bits_[s].size(); ++k) {
      if (bits & bits_[s][k]) local |= std::uint64_t{1} << k;
    }
    r[s] = rank_[s][local];
    if (r[s] < 0) return -1;
  }
  return r[0] * static_cast<std::int64_t>(dims_[1]) + r[1];
}

double SectorBasis::dimension(const std::vector<int>& species, int count0, int count1) {
  int m[2] = {0, 0};
  for (int s : species) ++m[s == 0 ? 0 : 1];
  auto binom = [](int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  };
  return binom(m[0], count0) * binom(m[1], count1);
}

Eigen::VectorXcd EdResult::dense_state() const {
  if (n_qubits > 26) throw CapabilityError("dense state limited to 26 qubits");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Eigen::Index{1} << n_qubits);
  for (std::size_t i = 0; i < basis.size(); ++i) v(static_cast<Eigen::Index>(basis[i])) = coefficients(i);
  return v;
}

MpsState EdResult::to_mps(int chi_max, double cutoff) const {
  return MpsState::from_dense(dense_state(), chi_max, cutoff);
}

EdResult exact_ground_state(const PauliSum& h, const QubitLayout& layout, std::pair<int, int> sector,
                            const EdOptions& options) {
  const int n = h.n_qubits();
  if (n != layout.n_qubits()) throw DomainError("layout does not match Hamiltonian");
  if (n > kEdQubitBudget) {
    throw CapabilityError(fmt::format("exact diagonalization limited to {} qubits", kEdQubitBudget));
  }
  const SectorBasis basis(n, layout.species(), sector.first, sector.second);
  if (basis.size() == 0) throw DomainError("empty sector");
  const auto compiled = compile(h);

  std::vector<double> diag(basis.size(), 0.0);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto b = basis.state(i);
    for (std::size_t k = 0; k < compiled.diagonal_masks.size(); ++k) {
      diag[i] += compiled.diagonal_coefficients[k] * ((std::popcount(b & compiled.diagonal_masks[k]) & 1) ? -1.0 : 1.0);
    }
  }
  // Terms sharing a flip pattern reach the same target state.
  std::map<std::uint64_t, std::vector<std::pair<std::uint64_t, cplx>>> groups;
  for (const auto& p : compiled.off_diagonal) groups[p.x_mask].push_back({p.z_mask, p.factor});

  auto apply = [&](const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
    out.resize(in.size());
    for (std::size_t i = 0; i < basis.size(); ++i) out[i] = diag[i] * in[i];
    for (std::size_t i = 0; i < basis.size(); ++i) {
      if (in[i] == cplx(0.0)) continue;
      const auto b = basis.state(i);
      for (const auto& [x, members] : groups) {
        const auto j = basis.index(b ^ x);
        if (j < 0) continue;
        cplx amp = 0.0;
        for (const auto& [z, f] : members) amp += (std::popcount(b & z) & 1) ? -f : f;
        out[j] += amp * in[i];
      }
    }
  };

  GaussianSource gauss(options.seed);
  Eigen::VectorXcd start(basis.size());
  for (auto& c : start) c = gauss.normal();
  const auto eig = lanczos_lowest(apply, start, options.tolerance, options.max_krylov, options.max_restarts);

  EdResult out;
  out.energy = eig.value;
  out.residual = eig.residual;
  out.iterations = eig.iterations;
  out.converged = eig.converged;
  out.n_qubits = n;
  out.basis = basis.states();
  out.coefficients = eig.vector;
  // Fix the global phase: largest-magnitude coefficient real positive.
  Eigen::Index imax = 0;
  out.coefficients.cwiseAbs().maxCoeff(&imax);
  if (std::abs(out.coefficients(imax)) > 0.0) {
    out.coefficients *= std::conj(out.coefficients(imax)) / std::abs(out.coefficients(imax));
  }
  return out;
}

EdResult exact_ground_state(const HubbardModel& model, const EdOptions& options) {
  const QubitLayout layout(model.geometry.n_sites());
  const auto sector = spin_sector(checkerboard_occupation(model.geometry, layout), layout);
  return exact_ground_state(jordan_wigner(model, layout), layout, sector, options);
}

}  // namespace tnvqe
