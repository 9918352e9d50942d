#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tnvqe/lattice.hpp"
#include "tnvqe/mps.hpp"
#include "tnvqe/pauli.hpp"

namespace tnvqe {

// Computational basis states with fixed particle number per species.
// Ordering: colex rank of the species-0 pattern (major) then species 1.
class SectorBasis {
 public:
  // species[q] in {0, 1}; counts are the required occupations per species.
  SectorBasis(int n_qubits, const std::vector<int>& species, int count0, int count1);

  int n_qubits() const { return n_qubits_; }
  std::size_t size() const { return states_.size(); }
  std::uint64_t state(std::size_t i) const { return states_[i]; }
  const std::vector<std::uint64_t>& states() const { return states_; }
  // Position of a basis index in the sector, or -1 if outside.
  std::int64_t index(std::uint64_t bits) const;

  // Size of the sector without building it.
  static double dimension(const std::vector<int>& species, int count0, int count1);

 private:
  int n_qubits_;
  std::array<std::vector<std::uint64_t>, 2> bits_;   // global bit of each local position
  std::array<std::vector<std::int32_t>, 2> rank_;    // local mask -> colex rank or -1
  std::array<std::size_t, 2> dims_{};
  std::vector<std::uint64_t> states_;
};

struct EdResult {
  double energy = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  int n_qubits = 0;
  std::vector<std::uint64_t> basis;  // sector basis indices
  Eigen::VectorXcd coefficients;     // normalized, aligned with basis

  Eigen::VectorXcd dense_state() const;
  MpsState to_mps(int chi_max, double cutoff = 1e-12) const;
};

struct EdOptions {
  double tolerance = 1e-10;  // residual target
  std::uint64_t seed = 12345;
  int max_krylov = 40;
  int max_restarts = 200;
};

inline constexpr int kEdQubitBudget = 24;

// Lowest eigenpair of h in the (N_up, N_down) sector defined by the layout's
// species labels. Throws CapabilityError above kEdQubitBudget qubits.
EdResult exact_ground_state(const PauliSum& h, const QubitLayout& layout, std::pair<int, int> sector,
                            const EdOptions& options = {});

// Interleaved layout, checkerboard sector.
EdResult exact_ground_state(const HubbardModel& model, const EdOptions& options = {});

}  // namespace tnvqe
