#include "tnvqe/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include <fmt/format.h>

#include "tnvqe/dmrg.hpp"
#include "tnvqe/ed.hpp"
#include "tnvqe/errors.hpp"
#include "tnvqe/rng.hpp"

namespace tnvqe {

namespace fs = std::filesystem;

nlohmann::json to_json(const BenchRecord& r) {
  return {{"nx", r.nx},
          {"ny", r.ny},
          {"u_over_t", r.u_over_t},
          {"v", r.v},
          {"d", r.d},
          {"ansatz", to_string(r.ansatz)},
          {"layers", r.layers},
          {"n_parameters", r.n_parameters},
          {"restart", r.restart},
          {"energy", r.energy},
          {"reference", r.reference},
          {"delta", r.delta},
          {"fidelity", r.fidelity ? nlohmann::json(*r.fidelity) : nlohmann::json(nullptr)},
          {"seed", r.seed},
          {"wall_time", r.wall_time},
          {"termination", to_string(r.termination)},
          {"reference_method", r.reference_method}};
}

BenchRecord bench_record_from_json(const nlohmann::json& j) {
  try {
    BenchRecord r;
    r.nx = j.at("nx").get<int>();
    r.ny = j.at("ny").get<int>();
    r.u_over_t = j.at("u_over_t").get<double>();
    r.v = j.at("v").get<double>();
    r.d = j.at("d").get<double>();
    r.ansatz = ansatz_family_from_string(j.at("ansatz").get<std::string>());
    r.layers = j.at("layers").get<int>();
    r.n_parameters = j.at("n_parameters").get<int>();
    r.restart = j.at("restart").get<int>();
    r.energy = j.at("energy").get<double>();
    r.reference = j.at("reference").get<double>();
    r.delta = j.at("delta").get<double>();
    if (!j.at("fidelity").is_null()) r.fidelity = j.at("fidelity").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.wall_time = j.at("wall_time").get<double>();
    r.termination = termination_from_string(j.at("termination").get<std::string>());
    r.reference_method = j.at("reference_method").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("malformed bench record: {}", e.what()));
  }
}

std::string csv_header() {
  return "nx,ny,u_over_t,v,d,ansatz,layers,n_parameters,restart,energy,reference,delta,fidelity,seed,wall_time,"
         "termination,reference_method";
}

void write_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << csv_header() << '\n';
  for (const auto& r : records) {
    out << fmt::format("{},{},{:.17g},{:.17g},{:.17g},{},{},{},{},{:.17g},{:.17g},{:.17g},{},{},{:.17g},{},{}\n", r.nx,
                       r.ny, r.u_over_t, r.v, r.d, to_string(r.ansatz), r.layers, r.n_parameters, r.restart, r.energy,
                       r.reference, r.delta, r.fidelity ? fmt::format("{:.17g}", *r.fidelity) : std::string(),
                       r.seed, r.wall_time, to_string(r.termination), r.reference_method);
  }
}

std::vector<BenchRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != csv_header()) throw ConfigError("CSV header does not match bench records");
  std::vector<BenchRecord> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 17) throw ConfigError(fmt::format("CSV line {}: expected 17 fields", line_no));
    try {
      BenchRecord r;
      r.nx = std::stoi(f[0]);
      r.ny = std::stoi(f[1]);
      r.u_over_t = std::stod(f[2]);
      r.v = std::stod(f[3]);
      r.d = std::stod(f[4]);
      r.ansatz = ansatz_family_from_string(f[5]);
      r.layers = std::stoi(f[6]);
      r.n_parameters = std::stoi(f[7]);
      r.restart = std::stoi(f[8]);
      r.energy = std::stod(f[9]);
      r.reference = std::stod(f[10]);
      r.delta = std::stod(f[11]);
      if (!f[12].empty()) r.fidelity = std::stod(f[12]);
      r.seed = std::stoull(f[13]);
      r.wall_time = std::stod(f[14]);
      r.termination = termination_from_string(f[15]);
      r.reference_method = f[16];
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw ConfigError(fmt::format("CSV line {}: malformed value", line_no));
    }
  }
  return out;
}

double error_per_site(double energy, double reference, int n_sites) {
  if (n_sites < 1) throw DomainError("number of sites must be positive");
  return (energy - reference) / n_sites;
}

std::optional<int> min_params_for_delta(const std::vector<BenchRecord>& records, double threshold) {
  if (records.empty()) return std::nullopt;
  std::map<int, double> best;
  for (const auto& r : records) {
    if (r.nx != records.front().nx || r.ny != records.front().ny) {
      throw DomainError("records span more than one lattice");
    }
    auto [it, inserted] = best.emplace(r.n_parameters, r.delta);
    if (!inserted) it->second = std::min(it->second, r.delta);
  }
  for (const auto& [p, delta] : best) {
    if (delta <= threshold) return p;
  }
  return std::nullopt;
}

PowerLawFit power_law_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw DomainError("power-law fit needs at least two points");
  const auto m = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd a(m, 2);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto [n, p] = points[i];
    if (!(n > 0.0) || !(p > 0.0)) throw DomainError("power-law fit needs positive data");
    a(i, 0) = 1.0;
    a(i, 1) = std::log(n);
    b[i] = std::log(p);
  }
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);
  if (!coef.allFinite()) throw DomainError("power-law fit is degenerate (all N equal)");
  PowerLawFit fit;
  fit.prefactor = std::exp(coef[0]);
  fit.exponent = coef[1];
  fit.residual = std::sqrt((a * coef - b).squaredNorm() / static_cast<double>(m));
  return fit;
}

std::string GridPoint::key() const {
  return fmt::format("{}x{}/u={}/d={}/v={}/{}/l={}", nx, ny, u_over_t, d, v, to_string(ansatz), layers);
}

void SweepPlan::validate() const {
  for (const auto& [nx, ny] : lattices) {
    if (nx < 1 || ny < 1 || nx * ny < 2) throw ConfigError(fmt::format("invalid lattice {}x{}", nx, ny));
  }
  if (u_over_t.empty() || disorder.empty() || v.empty() || ansatz.empty()) {
    throw ConfigError("plan axes must not be empty");
  }
  if (layer_min < 1 || layer_max < layer_min) throw ConfigError("invalid layer range");
  if (!(t > 0.0)) throw ConfigError("t must be positive");
  if (!(ed_dimension_limit >= 0.0) || dmrg_chi < 0) throw ConfigError("invalid reference policy");
  optimization.validate();
}

std::vector<GridPoint> SweepPlan::grid() const {
  std::vector<GridPoint> out;
  for (const auto& [nx, ny] : lattices) {
    for (double u : u_over_t) {
      for (double d : disorder) {
        for (double vv : v) {
          for (auto fam : ansatz) {
            if (fam == AnsatzFamily::UCCSD) {
              out.push_back({nx, ny, u, d, vv, fam, 0});
              continue;
            }
            for (int l = layer_min; l <= layer_max; ++l) out.push_back({nx, ny, u, d, vv, fam, l});
          }
        }
      }
    }
  }
  return out;
}

HubbardModel SweepPlan::model(const GridPoint& p) const {
  const std::uint64_t seed = derive_seed(model_seed, static_cast<std::uint64_t>(p.nx) << 32 | p.ny);
  return realize_model(LatticeGeometry(p.nx, p.ny), t, p.u_over_t * t, p.v, p.d, seed);
}

namespace {

nlohmann::json optimization_json(const OptimizationConfig& c) {
  return {{"loss", to_string(c.loss)},       {"restarts", c.restarts},       {"init_variance", c.init_variance},
          {"energy_tol", c.energy_tol},      {"grad_tol", c.grad_tol},       {"max_steps", c.max_steps},
          {"warm_start", c.warm_start},      {"master_seed", c.master_seed}, {"lbfgs_memory", c.lbfgs_memory},
          {"chi_max", c.chi_max},            {"cutoff", c.cutoff}};
}

template <typename T>
void read_if(const nlohmann::json& doc, const char* key, T& out) {
  if (doc.contains(key)) out = doc.at(key).get<T>();
}

}  // namespace

nlohmann::json SweepPlan::to_json() const {
  std::vector<std::string> families;
  for (auto f : ansatz) families.push_back(to_string(f));
  nlohmann::json lat = nlohmann::json::array();
  for (const auto& [nx, ny] : lattices) lat.push_back({nx, ny});
  return {{"lattices", lat},
          {"u_over_t", u_over_t},
          {"disorder", disorder},
          {"v", v},
          {"ansatz", families},
          {"layers", {layer_min, layer_max}},
          {"t", t},
          {"model_seed", model_seed},
          {"optimization", optimization_json(optimization)},
          {"ed_dimension_limit", ed_dimension_limit},
          {"dmrg_chi", dmrg_chi}};
}

SweepPlan SweepPlan::from_json(const nlohmann::json& doc) {
  static const std::set<std::string> plan_keys{"lattices", "u_over_t", "disorder",     "v",
                                               "ansatz",   "layers",   "t",            "model_seed",
                                               "optimization", "ed_dimension_limit", "dmrg_chi"};
  static const std::set<std::string> opt_keys{"loss",       "restarts",    "init_variance", "energy_tol",
                                              "grad_tol",   "max_steps",   "warm_start",    "master_seed",
                                              "lbfgs_memory", "chi_max",   "cutoff"};
  if (!doc.is_object()) throw ConfigError("sweep plan must be a JSON object");
  SweepPlan plan;
  try {
    for (const auto& [k, _] : doc.items()) {
      if (!plan_keys.count(k)) throw ConfigError(fmt::format("unknown plan key '{}'", k));
    }
    if (doc.contains("lattices")) {
      for (const auto& l : doc.at("lattices")) plan.lattices.emplace_back(l.at(0).get<int>(), l.at(1).get<int>());
    }
    read_if(doc, "u_over_t", plan.u_over_t);
    read_if(doc, "disorder", plan.disorder);
    read_if(doc, "v", plan.v);
    if (doc.contains("ansatz")) {
      plan.ansatz.clear();
      for (const auto& a : doc.at("ansatz")) plan.ansatz.push_back(ansatz_family_from_string(a.get<std::string>()));
    }
    if (doc.contains("layers")) {
      const auto& l = doc.at("layers");
      if (l.is_number_integer()) {
        plan.layer_min = plan.layer_max = l.get<int>();
      } else {
        plan.layer_min = l.at(0).get<int>();
        plan.layer_max = l.at(1).get<int>();
      }
    }
    read_if(doc, "t", plan.t);
    read_if(doc, "model_seed", plan.model_seed);
    read_if(doc, "ed_dimension_limit", plan.ed_dimension_limit);
    read_if(doc, "dmrg_chi", plan.dmrg_chi);
    if (doc.contains("optimization")) {
      const auto& o = doc.at("optimization");
      for (const auto& [k, _] : o.items()) {
        if (!opt_keys.count(k)) throw ConfigError(fmt::format("unknown optimization key '{}'", k));
      }
      auto& c = plan.optimization;
      if (o.contains("loss")) c.loss = loss_kind_from_string(o.at("loss").get<std::string>());
      read_if(o, "restarts", c.restarts);
      read_if(o, "init_variance", c.init_variance);
      read_if(o, "energy_tol", c.energy_tol);
      read_if(o, "grad_tol", c.grad_tol);
      read_if(o, "max_steps", c.max_steps);
      read_if(o, "warm_start", c.warm_start);
      read_if(o, "master_seed", c.master_seed);
      read_if(o, "lbfgs_memory", c.lbfgs_memory);
      read_if(o, "chi_max", c.chi_max);
      read_if(o, "cutoff", c.cutoff);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("malformed sweep plan: {}", e.what()));
  }
  plan.validate();
  return plan;
}

SweepPlan load_sweep_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open plan '{}'", path));
  try {
    return SweepPlan::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(fmt::format("plan '{}' is not valid JSON: {}", path, e.what()));
  }
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

std::string SweepPlan::content_hash() const { return fnv1a_hex(to_json().dump()); }

std::string SweepPlan::point_hash(const GridPoint& p) const {
  nlohmann::json doc = {{"point", p.key()},
                        {"t", t},
                        {"model_seed", model_seed},
                        {"optimization", optimization_json(optimization)},
                        {"ed_dimension_limit", ed_dimension_limit},
                        {"dmrg_chi", dmrg_chi}};
  return fnv1a_hex(doc.dump());
}

ReferenceResult compute_reference(const HubbardModel& model, double ed_dimension_limit, int dmrg_chi) {
  const auto& geo = model.geometry;
  const QubitLayout layout(geo.n_sites());
  const int n = layout.n_qubits();
  const auto [nu, nd] = spin_sector(checkerboard_occupation(geo, layout), layout);
  const double dim = SectorBasis::dimension(layout.species(), nu, nd);
  const int full = full_bond_dimension(n);
  ReferenceResult ref;
  if (dim <= ed_dimension_limit && n <= kEdQubitBudget) {
    EdResult ed = exact_ground_state(model);
    ref.energy = ed.energy;
    ref.method = "ed";
    ref.state = ed.to_mps(full);
  } else {
    DmrgOptions opts;
    opts.chi_max = dmrg_chi > 0 ? dmrg_chi : full;
    opts.max_sweeps = 40;
    DmrgResult dm = dmrg_ground_state(model, opts);
    ref.energy = dm.energy;
    ref.method = "dmrg";
    ref.state = std::move(dm.state);
  }
  return ref;
}

int workers_from_environment() {
  const char* env = std::getenv("TNVQE_WORKERS");
  if (!env || !*env) return 1;
  try {
    const int w = std::stoi(env);
    if (w < 1) throw ConfigError("TNVQE_WORKERS must be at least 1");
    return w;
  } catch (const std::logic_error&) {
    throw ConfigError(fmt::format("TNVQE_WORKERS='{}' is not an integer", env));
  }
}

namespace {

// Runs fn(i) for i in [0, count) on up to `workers` threads; the first
// exception is rethrown after all threads finish.
template <typename Fn>
void parallel_for(int count, int workers, Fn&& fn) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next++; i < count; i = next++) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string model_key(const GridPoint& p) { return fmt::format("{}x{}/u={}/d={}/v={}", p.nx, p.ny, p.u_over_t, p.d, p.v); }

}  // namespace

SweepResult run_sweep(const SweepPlan& plan, const SweepOptions& options) {
  plan.validate();
  const std::vector<GridPoint> grid = plan.grid();
  SweepResult result;
  if (grid.empty()) return result;
  const bool use_cache = !options.cache_dir.empty();
  if (use_cache) fs::create_directories(options.cache_dir);
  auto cache_file = [&](const std::string& name) { return (fs::path(options.cache_dir) / name).string(); };

  // Grid points already on disk.
  std::vector<std::optional<std::vector<BenchRecord>>> done(grid.size());
  std::vector<bool> from_cache(grid.size(), false);
  if (use_cache) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      std::ifstream in(cache_file(plan.point_hash(grid[i]) + ".json"));
      if (!in) continue;
      try {
        const auto doc = nlohmann::json::parse(in);
        std::vector<BenchRecord> recs;
        for (const auto& r : doc.at("records")) recs.push_back(bench_record_from_json(r));
        done[i] = std::move(recs);
        from_cache[i] = true;
      } catch (const std::exception&) {
        // unreadable entry: recompute
      }
    }
  }

  // References for the models still needed.
  std::vector<GridPoint> models;
  std::map<std::string, std::size_t> model_index;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (done[i]) continue;
    const std::string key = model_key(grid[i]);
    if (model_index.emplace(key, models.size()).second) models.push_back(grid[i]);
  }
  std::vector<std::optional<ReferenceResult>> refs(models.size());
  std::vector<std::string> ref_errors(models.size());
  parallel_for(static_cast<int>(models.size()), options.workers, [&](int m) {
    const GridPoint& p = models[m];
    const std::string stem = "ref-" + fnv1a_hex(fmt::format("{}|{}|{}|{}|{}", model_key(p), plan.t, plan.model_seed,
                                                            plan.ed_dimension_limit, plan.dmrg_chi));
    try {
      if (use_cache && fs::exists(cache_file(stem + ".json")) && fs::exists(cache_file(stem + ".mps"))) {
        std::ifstream in(cache_file(stem + ".json"));
        const auto doc = nlohmann::json::parse(in);
        refs[m] = ReferenceResult{doc.at("energy").get<double>(), doc.at("method").get<std::string>(),
                                  MpsState::load(cache_file(stem + ".mps"))};
        return;
      }
      refs[m] = compute_reference(plan.model(p), plan.ed_dimension_limit, plan.dmrg_chi);
      if (use_cache) {
        refs[m]->state.save(cache_file(stem + ".mps"));
        std::ofstream(cache_file(stem + ".json"))
            << nlohmann::json{{"key", model_key(p)}, {"energy", refs[m]->energy}, {"method", refs[m]->method}}.dump(2);
      }
    } catch (const std::exception& e) {
      ref_errors[m] = e.what();
    }
  });

  std::vector<std::string> errors(grid.size());
  std::mutex write_mutex;
  parallel_for(static_cast<int>(grid.size()), options.workers, [&](int i) {
    if (done[i]) return;
    const GridPoint& p = grid[i];
    const std::size_t m = model_index.at(model_key(p));
    if (!refs[m]) {
      errors[i] = "reference failed: " + ref_errors[m];
      return;
    }
    try {
      const ReferenceResult& ref = *refs[m];
      const VqeResult vr = run_vqe(plan.model(p), p.ansatz, p.layers, plan.optimization, ref.state);
      std::vector<BenchRecord> recs;
      for (const auto& rr : vr.restarts) {
        BenchRecord b;
        b.nx = p.nx;
        b.ny = p.ny;
        b.u_over_t = p.u_over_t;
        b.v = p.v;
        b.d = p.d;
        b.ansatz = p.ansatz;
        b.layers = p.layers;
        b.n_parameters = vr.n_parameters;
        b.restart = rr.index;
        b.energy = rr.final_energy;
        b.reference = ref.energy;
        b.delta = error_per_site(rr.final_energy, ref.energy, p.nx * p.ny);
        b.fidelity = rr.fidelity;
        b.seed = rr.seed;
        b.wall_time = rr.wall_time;
        b.termination = rr.termination;
        b.reference_method = ref.method;
        recs.push_back(std::move(b));
      }
      if (use_cache) {
        nlohmann::json doc = {{"key", p.key()}, {"records", nlohmann::json::array()}};
        for (const auto& b : recs) doc["records"].push_back(to_json(b));
        std::lock_guard lock(write_mutex);
        std::ofstream(cache_file(plan.point_hash(p) + ".json")) << doc.dump(2);
      }
      done[i] = std::move(recs);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!done[i]) {
      result.failures.push_back({grid[i].key(), errors[i]});
      continue;
    }
    ++(from_cache[i] ? result.cached : result.computed);
    for (const auto& r : *done[i]) result.records.push_back(r);
  }
  return result;
}

namespace {

// 4 decimals without a negative zero.
std::string fixed4(double x) {
  std::string s = fmt::format("{:.4f}", x);
  return s == "-0.0000" ? "0.0000" : s;
}

}  // namespace

std::string summary_tables(const std::vector<BenchRecord>& records) {
  using Key = std::tuple<int, int, double, double, double, std::string>;
  std::map<Key, std::map<int, std::vector<const BenchRecord*>>> groups;
  for (const auto& r : records) {
    groups[{r.nx, r.ny, r.u_over_t, r.d, r.v, to_string(r.ansatz)}][r.n_parameters].push_back(&r);
  }
  std::string out;
  for (const auto& [key, rows] : groups) {
    const auto& [nx, ny, u, d, v, fam] = key;
    std::string upper = fam;
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    out += fmt::format("{} ansatz, U/t = {}, d = {}, V = {}, lattice {}x{}\n", upper, u, d, v, nx, ny);
    std::size_t width = 0;
    for (const auto& [p, recs] : rows) width = std::max(width, recs.size());
    out += "Num Parameters";
    for (std::size_t c = 0; c < width; ++c) out += fmt::format(" | VQE {}", c + 1);
    out += '\n';
    const BenchRecord* any = nullptr;
    for (const auto& [p, recs] : rows) {
      std::vector<double> e;
      for (const auto* r : recs) e.push_back(r->energy);
      std::sort(e.begin(), e.end());
      out += fmt::format("{}", p);
      for (double x : e) out += " | " + fixed4(x);
      out += '\n';
      any = recs.front();
    }
    out += fmt::format("Reference energy ({}): {}\n\n", any->reference_method, fixed4(any->reference));
  }
  return out;
}

}  // namespace tnvqe
