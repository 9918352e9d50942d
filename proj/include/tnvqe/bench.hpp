#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tnvqe/circuit.hpp"
#include "tnvqe/lbfgs.hpp"
#include "tnvqe/mps.hpp"
#include "tnvqe/vqe.hpp"

namespace tnvqe {

// One row per (grid point, restart). Field order is the CSV column order.
struct BenchRecord {
  int nx = 1;
  int ny = 2;
  double u_over_t = 0.0;
  double v = 0.0;
  double d = 0.0;
  AnsatzFamily ansatz = AnsatzFamily::NP;
  int layers = 0;
  int n_parameters = 0;
  int restart = 0;
  double energy = 0.0;
  double reference = 0.0;
  double delta = 0.0;
  std::optional<double> fidelity;
  std::uint64_t seed = 0;
  double wall_time = 0.0;
  Termination termination = Termination::MaxSteps;
  std::string reference_method;  // "ed" or "dmrg"

  int n_sites() const { return nx * ny; }
};

nlohmann::json to_json(const BenchRecord& record);
BenchRecord bench_record_from_json(const nlohmann::json& doc);

std::string csv_header();
// Floats with 17 significant digits; empty field for a missing fidelity.
void write_csv(std::ostream& out, const std::vector<BenchRecord>& records);
std::vector<BenchRecord> read_csv(std::istream& in);

// (E - E_ref) / N.
double error_per_site(double energy, double reference, int n_sites);

// Smallest n_parameters whose best-of-restarts delta is <= threshold.
// All records must belong to one lattice.
std::optional<int> min_params_for_delta(const std::vector<BenchRecord>& records, double threshold);

struct PowerLawFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double residual = 0.0;  // root-mean-square residual of log(p)
};

// Least squares of log p = log a + n log N.
PowerLawFit power_law_fit(const std::vector<std::pair<double, double>>& points);

struct GridPoint {
  int nx = 1;
  int ny = 2;
  double u_over_t = 0.0;
  double d = 0.0;
  double v = 0.0;
  AnsatzFamily ansatz = AnsatzFamily::NP;
  int layers = 0;

  std::string key() const;
};

struct SweepPlan {
  std::vector<std::pair<int, int>> lattices;
  std::vector<double> u_over_t{2.0};
  std::vector<double> disorder{0.0};
  std::vector<double> v{0.0};
  std::vector<AnsatzFamily> ansatz{AnsatzFamily::NP};
  int layer_min = 1;
  int layer_max = 1;
  double t = 1.0;
  // Disorder realization seed; one realization per lattice, shared by every
  // U, d and V on it.
  std::uint64_t model_seed = 0;
  OptimizationConfig optimization;
  // ED when the sector dimension is at most this, DMRG otherwise.
  double ed_dimension_limit = 1e6;
  int dmrg_chi = 0;  // 0: full bond dimension

  void validate() const;
  // UCCSD contributes one point per model (layers = 0).
  std::vector<GridPoint> grid() const;
  HubbardModel model(const GridPoint& point) const;

  nlohmann::json to_json() const;
  static SweepPlan from_json(const nlohmann::json& doc);
  // FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
  std::string content_hash() const;
  // Hash of a grid point together with every plan setting that affects it.
  std::string point_hash(const GridPoint& point) const;
};

SweepPlan load_sweep_plan(const std::string& path);

std::string fnv1a_hex(const std::string& text);

struct ReferenceResult {
  double energy = 0.0;
  std::string method;
  MpsState state;
};

// Ground state of `model` under the plan's policy.
ReferenceResult compute_reference(const HubbardModel& model, double ed_dimension_limit, int dmrg_chi);

struct SweepOptions {
  std::string cache_dir;  // empty: no on-disk cache
  int workers = 1;
};

struct SweepFailure {
  std::string key;
  std::string message;
};

struct SweepResult {
  std::vector<BenchRecord> records;  // canonical grid order, then restart
  std::vector<SweepFailure> failures;
  int computed = 0;
  int cached = 0;
};

// Worker count from TNVQE_WORKERS, default 1.
int workers_from_environment();

SweepResult run_sweep(const SweepPlan& plan, const SweepOptions& options = {});

// Energy tables: one block per (lattice, U/t, d, V, ansatz);
// rows = n_parameters, columns = restart energies ascending, footer =
// reference energy. Values rounded to 4 decimals.
std::string summary_tables(const std::vector<BenchRecord>& records);

}  // namespace tnvqe
