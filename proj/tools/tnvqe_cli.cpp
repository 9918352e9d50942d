#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "tnvqe/bench.hpp"
#include "tnvqe/dmrg.hpp"
#include "tnvqe/ed.hpp"
#include "tnvqe/errors.hpp"
#include "tnvqe/observables.hpp"
#include "tnvqe/vqe.hpp"

using namespace tnvqe;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
// Larger instances need --heavy.
constexpr int kLightQubitLimit = 20;

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int chi = 0;
  int restarts = 0;
  std::string loss;
  std::string out;
  std::string format = "json";
  bool heavy = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "model config (key = value) or sweep plan (JSON)");
  app->add_option("--seed", c.seed, "master seed");
  app->add_option("--chi", c.chi, "maximum bond dimension (0: exact)");
  app->add_option("--restarts", c.restarts, "number of VQE restarts");
  app->add_option("--loss", c.loss, "energy or overlap")->check(CLI::IsMember({"energy", "overlap"}));
  app->add_option("--out", c.out, "output file (default: stdout)");
  app->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app->add_flag("--heavy", c.heavy, "allow instances above 20 qubits");
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw ConfigError(fmt::format("cannot write '{}'", c.out));
  f << text;
}

HubbardModel load_model(const Common& c) {
  if (c.config.empty()) throw ConfigError("--config is required");
  HubbardModel m = realize_model(load_model_config(c.config));
  if (m.geometry.n_qubits() > kLightQubitLimit && !c.heavy) {
    throw ConfigError(fmt::format("{}x{} needs {} qubits; pass --heavy", m.geometry.nx(), m.geometry.ny(),
                                  m.geometry.n_qubits()));
  }
  return m;
}

std::string matrix_csv(const Eigen::MatrixXd& m) {
  std::string s;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) s += fmt::format("{}{:.17g}", j ? "," : "", m(i, j));
    s += '\n';
  }
  return s;
}

std::vector<BenchRecord> read_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open '{}'", path));
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(e.what());
    }
    std::vector<BenchRecord> out;
    for (const auto& r : doc.at("records")) out.push_back(bench_record_from_json(r));
    return out;
  }
  return read_csv(in);
}

int run_ed(const Common& c, const std::string& state_path) {
  const HubbardModel model = load_model(c);
  const EdResult r = exact_ground_state(model);
  if (!r.converged) throw NumericalError(fmt::format("Lanczos did not converge (residual {:.3e})", r.residual));
  if (!state_path.empty()) r.to_mps(full_bond_dimension(r.n_qubits)).save(state_path);
  if (c.format == "csv") {
    emit(c, fmt::format("method,energy,residual,iterations\ned,{:.17g},{:.17g},{}\n", r.energy, r.residual,
                        r.iterations));
  } else {
    nlohmann::json doc = {{"method", "ed"},         {"energy", r.energy},
                          {"residual", r.residual}, {"iterations", r.iterations},
                          {"sector_dimension", r.basis.size()}, {"model", model_to_json(model)}};
    emit(c, doc.dump(2) + "\n");
  }
  return 0;
}

int run_dmrg(const Common& c, const std::string& state_path, int sweeps) {
  const HubbardModel model = load_model(c);
  DmrgOptions opts;
  opts.chi_max = c.chi > 0 ? c.chi : full_bond_dimension(model.geometry.n_qubits());
  opts.max_sweeps = sweeps;
  const DmrgResult r = dmrg_ground_state(model, opts);
  if (!state_path.empty()) r.state.save(state_path);
  if (c.format == "csv") {
    std::string s = "sweep,energy\n";
    for (std::size_t i = 0; i < r.sweep_energies.size(); ++i) s += fmt::format("{},{:.17g}\n", i + 1, r.sweep_energies[i]);
    emit(c, s);
  } else {
    nlohmann::json doc = {{"method", "dmrg"},
                          {"energy", r.energy},
                          {"chi_max", opts.chi_max},
                          {"sweeps", r.sweeps},
                          {"converged", r.converged},
                          {"sweep_energies", r.sweep_energies},
                          {"discarded_weight", r.discarded_weight},
                          {"model", model_to_json(model)}};
    emit(c, doc.dump(2) + "\n");
  }
  return 0;
}

struct VqeArgs {
  std::string ansatz = "np";
  int layers = 1;
  std::string state;
  std::string reference;
  bool check_gradient = false;
  bool no_warm_start = false;
  int max_steps = 1000;
  double init_variance = 1e-5;
};

int run_vqe_cmd(const Common& c, const VqeArgs& a) {
  const HubbardModel model = load_model(c);
  OptimizationConfig cfg;
  if (!c.loss.empty()) cfg.loss = loss_kind_from_string(c.loss);
  if (c.restarts > 0) cfg.restarts = c.restarts;
  cfg.master_seed = c.seed;
  cfg.chi_max = c.chi;
  cfg.check_gradient = a.check_gradient;
  cfg.warm_start = !a.no_warm_start;
  cfg.max_steps = a.max_steps;
  cfg.init_variance = a.init_variance;
  cfg.workers = workers_from_environment();
  std::optional<ReferenceResult> ref;
  if (!a.reference.empty()) {
    ref = ReferenceResult{0.0, "file", MpsState::load(a.reference)};
  } else if (cfg.loss == LossKind::Overlap || model.geometry.n_qubits() <= 16) {
    ref = compute_reference(model, 1e6, c.chi);
  }
  VqeResult r = run_vqe(model, ansatz_family_from_string(a.ansatz), a.layers, cfg,
                        ref ? std::optional<MpsState>(ref->state) : std::nullopt);
  if (!r.valid) {
    std::cerr << "every restart failed its line search\n";
  }
  if (r.valid && !a.state.empty()) {
    const QubitLayout layout(model.geometry.n_sites());
    const Occupation initial = checkerboard_occupation(model.geometry, layout);
    Circuit circuit = r.ansatz.family == AnsatzFamily::UCCSD ? build_uccsd_ansatz(model.geometry, initial)
                                                              : build_ansatz(r.ansatz.family, model.geometry, r.ansatz.layers);
    const VqeProblem p(std::move(circuit), initial, jordan_wigner(model, layout), LossKind::Energy,
                       std::nullopt, Backend::Auto, cfg.chi_max, cfg.cutoff);
    p.state(r.best_params).save(a.state);
    r.best_state_path = a.state;
  }
  if (c.format == "csv") {
    std::vector<BenchRecord> recs;
    for (const auto& rr : r.restarts) {
      BenchRecord b;
      b.nx = model.geometry.nx();
      b.ny = model.geometry.ny();
      b.u_over_t = model.u / model.t;
      b.v = model.v;
      b.d = model.disorder;
      b.ansatz = r.ansatz.family;
      b.layers = r.ansatz.layers;
      b.n_parameters = r.n_parameters;
      b.restart = rr.index;
      b.energy = rr.final_energy;
      if (ref && ref->method != "file") {
        b.reference = ref->energy;
        b.delta = error_per_site(rr.final_energy, ref->energy, model.geometry.n_sites());
        b.reference_method = ref->method;
      }
      b.fidelity = rr.fidelity;
      b.seed = rr.seed;
      b.wall_time = rr.wall_time;
      b.termination = rr.termination;
      recs.push_back(b);
    }
    std::ostringstream s;
    write_csv(s, recs);
    emit(c, s.str());
  } else {
    nlohmann::json doc = to_json(r);
    doc["model"] = model_to_json(model);
    if (ref && ref->method != "file") doc["reference"] = {{"method", ref->method}, {"energy", ref->energy}};
    emit(c, doc.dump(2) + "\n");
  }
  return r.valid ? 0 : kExitNumerical;
}

int run_sweep_cmd(const Common& c, const std::string& cache) {
  if (c.config.empty()) throw ConfigError("--config <plan.json> is required");
  SweepPlan plan = load_sweep_plan(c.config);
  if (c.restarts > 0) plan.optimization.restarts = c.restarts;
  if (c.seed_set) plan.optimization.master_seed = c.seed;
  if (!c.loss.empty()) plan.optimization.loss = loss_kind_from_string(c.loss);
  if (c.chi > 0) plan.dmrg_chi = c.chi;
  for (const auto& [nx, ny] : plan.lattices) {
    if (2 * nx * ny > kLightQubitLimit && !c.heavy) {
      throw ConfigError(fmt::format("plan contains {}x{}; pass --heavy", nx, ny));
    }
  }
  SweepOptions opts;
  opts.cache_dir = cache;
  opts.workers = workers_from_environment();
  const SweepResult r = run_sweep(plan, opts);
  if (c.format == "csv") {
    std::ostringstream s;
    write_csv(s, r.records);
    emit(c, s.str());
  } else {
    nlohmann::json doc = {{"plan", plan.to_json()},
                          {"plan_hash", plan.content_hash()},
                          {"computed", r.computed},
                          {"cached", r.cached},
                          {"records", nlohmann::json::array()},
                          {"failures", nlohmann::json::array()}};
    for (const auto& rec : r.records) doc["records"].push_back(to_json(rec));
    for (const auto& f : r.failures) doc["failures"].push_back({{"key", f.key}, {"message", f.message}});
    emit(c, doc.dump(2) + "\n");
  }
  std::cerr << summary_tables(r.records);
  std::cerr << fmt::format("grid points: {} computed, {} cached, {} failed\n", r.computed, r.cached,
                           r.failures.size());
  for (const auto& f : r.failures) std::cerr << fmt::format("failed {}: {}\n", f.key, f.message);
  return 0;
}

int run_corr(const Common& c, const std::string& state_path) {
  const HubbardModel model = load_model(c);
  const QubitLayout layout(model.geometry.n_sites());
  MpsState psi = state_path.empty() ? compute_reference(model, 1e6, c.chi).state : MpsState::load(state_path);
  if (psi.n_qubits() != layout.n_qubits()) throw ConfigError("state does not match the model size");
  const Eigen::MatrixXd corr = spin_correlation_matrix(psi, layout);
  if (c.format == "csv") {
    emit(c, matrix_csv(corr));
  } else {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < corr.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < corr.cols(); ++j) row.push_back(corr(i, j));
      rows.push_back(std::move(row));
    }
    emit(c, nlohmann::json{{"spin_correlation", rows}}.dump(2) + "\n");
  }
  return 0;
}

int run_fit(const Common& c, const std::string& input, const std::string& points, double threshold) {
  std::vector<std::pair<double, double>> data;
  nlohmann::json groups = nlohmann::json::array();
  if (!points.empty()) {
    std::stringstream ss(points);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw ConfigError(fmt::format("bad point '{}', expected N:p", item));
      try {
        data.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
      } catch (const std::logic_error&) {
        throw ConfigError(fmt::format("bad point '{}'", item));
      }
    }
  } else {
    if (input.empty()) throw ConfigError("fit needs --input or --points");
    // Minimal parameter count per lattice, pooled over one (U/t, ansatz) group.
    std::map<std::tuple<double, double, double, std::string>, std::map<std::pair<int, int>, std::vector<BenchRecord>>>
        by_group;
    for (auto& r : read_records(input)) {
      by_group[{r.u_over_t, r.d, r.v, to_string(r.ansatz)}][{r.nx, r.ny}].push_back(r);
    }
    if (by_group.size() != 1) throw ConfigError("fit input must hold a single (U/t, d, V, ansatz) group");
    for (const auto& [lat, recs] : by_group.begin()->second) {
      const auto p = min_params_for_delta(recs, threshold);
      groups.push_back({{"lattice", fmt::format("{}x{}", lat.first, lat.second)},
                        {"min_parameters", p ? nlohmann::json(*p) : nlohmann::json(nullptr)}});
      if (p) data.emplace_back(lat.first * lat.second, *p);
    }
  }
  const PowerLawFit fit = power_law_fit(data);
  nlohmann::json doc = {{"threshold", threshold},
                        {"points", data},
                        {"lattices", groups},
                        {"exponent", fit.exponent},
                        {"prefactor", fit.prefactor},
                        {"residual", fit.residual}};
  if (c.format == "csv") {
    emit(c, fmt::format("exponent,prefactor,residual\n{:.17g},{:.17g},{:.17g}\n", fit.exponent, fit.prefactor,
                        fit.residual));
  } else {
    emit(c, doc.dump(2) + "\n");
  }
  return 0;
}

int run_report(const Common& c, const std::string& input) {
  if (input.empty()) throw ConfigError("report needs --input");
  emit(c, summary_tables(read_records(input)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hubbard-model VQE on matrix product states"};
  app.require_subcommand(1);
  Common common;
  std::string state_path, cache_dir, input, points;
  int sweeps = 30;
  double threshold = 0.01;
  VqeArgs vargs;

  auto* ed = app.add_subcommand("ed", "exact ground state in the half-filled checkerboard sector");
  add_common(ed, common);
  ed->add_option("--state", state_path, "write the ground state (MPS binary)");

  auto* dmrg = app.add_subcommand("dmrg", "two-site DMRG ground state");
  add_common(dmrg, common);
  dmrg->add_option("--state", state_path, "write the ground state (MPS binary)");
  dmrg->add_option("--sweeps", sweeps, "maximum sweeps");

  auto* vqe = app.add_subcommand("vqe", "variational optimization of an ansatz circuit");
  add_common(vqe, common);
  vqe->add_option("--ansatz", vargs.ansatz, "np, ep or uccsd")->check(CLI::IsMember({"np", "ep", "uccsd"}));
  vqe->add_option("--layers", vargs.layers, "number of layers");
  vqe->add_option("--state", vargs.state, "write the best state (MPS binary)");
  vqe->add_option("--reference", vargs.reference, "reference state for the overlap loss (MPS binary)");
  vqe->add_option("--max-steps", vargs.max_steps, "L-BFGS step limit");
  vqe->add_option("--init-variance", vargs.init_variance, "variance of the Gaussian initial parameters");
  vqe->add_flag("--check-gradient", vargs.check_gradient, "compare analytic and finite-difference gradients");
  vqe->add_flag("--no-warm-start", vargs.no_warm_start, "skip the non-interacting warm start");

  auto* sweep = app.add_subcommand("sweep", "run a sweep plan; summary tables go to stderr");
  add_common(sweep, common);
  sweep->add_option("--cache", cache_dir, "directory for cached grid points and references");

  auto* corr = app.add_subcommand("corr", "spin correlation matrix C_ij");
  add_common(corr, common);
  corr->add_option("--state", state_path, "state file (default: reference ground state)");

  auto* fit = app.add_subcommand("fit", "power-law fit of minimal parameter counts");
  add_common(fit, common);
  fit->add_option("--input", input, "bench records (.csv or .json)");
  fit->add_option("--points", points, "explicit N:p pairs, comma separated");
  fit->add_option("--threshold", threshold, "error-per-site threshold");

  auto* report = app.add_subcommand("report", "energy tables (one block per model) from bench records");
  add_common(report, common);
  report->add_option("--input", input, "bench records (.csv or .json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  for (auto* sub : {ed, dmrg, vqe, sweep, corr, fit, report}) {
    if (sub->parsed()) common.seed_set = sub->count("--seed") > 0;
  }

  try {
    if (ed->parsed()) return run_ed(common, state_path);
    if (dmrg->parsed()) return run_dmrg(common, state_path, sweeps);
    if (vqe->parsed()) return run_vqe_cmd(common, vargs);
    if (sweep->parsed()) return run_sweep_cmd(common, cache_dir);
    if (corr->parsed()) return run_corr(common, state_path);
    if (fit->parsed()) return run_fit(common, input, points, threshold);
    if (report->parsed()) return run_report(common, input);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CapabilityError& e) {
    std::cerr << "unsupported: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical check failed: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
