#pragma once

#include <cstdint>
#include <vector>

#include "tnvqe/lattice.hpp"
#include "tnvqe/mpo.hpp"
#include "tnvqe/mps.hpp"

namespace tnvqe {

struct DmrgOptions {
  int chi_max = 64;
  int max_sweeps = 20;
  double energy_tol = 1e-10;
  double cutoff = 1e-12;
  // Weight given to enrichment directions added at each split; multiplied by
  // noise_decay after every sweep and switched off below 1e-14.
  double noise = 1e-8;
  double noise_decay = 0.1;
  // First sweep runs at chi_start, doubling every sweep up to chi_max.
  int chi_start = 16;
  // Per-qubit conserved species (0 or 1). When non-empty the initial state
  // must be a computational basis state and its per-species particle numbers
  // are preserved exactly.
  std::vector<int> species;
  double lanczos_tol = 1e-9;
  int lanczos_krylov = 30;
};

struct DmrgResult {
  double energy = 0.0;
  double initial_energy = 0.0;
  MpsState state;
  std::vector<double> sweep_energies;
  int sweeps = 0;
  bool converged = false;
  double discarded_weight = 0.0;  // largest single-split discarded weight in the last sweep
};

DmrgResult dmrg_ground_state(const MpoOperator& op, const MpsState& initial, const DmrgOptions& options);

// Interleaved layout, checkerboard start, per-spin particle numbers conserved.
DmrgResult dmrg_ground_state(const HubbardModel& model, DmrgOptions options);

}  // namespace tnvqe
