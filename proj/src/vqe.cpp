#include "tnvqe/vqe.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include <fmt/format.h>

#include "tnvqe/errors.hpp"
#include "tnvqe/rng.hpp"
#include "tnvqe/statevector.hpp"

namespace tnvqe {

std::string to_string(LossKind loss) { return loss == LossKind::Energy ? "energy" : "overlap"; }

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "energy") return LossKind::Energy;
  if (name == "overlap") return LossKind::Overlap;
  throw ConfigError(fmt::format("unknown loss '{}'", name));
}

double overlap_loss_from_fidelity(double fidelity) {
  return std::log10(std::max(1.0 - fidelity, kInfidelityFloor));
}

void OptimizationConfig::validate() const {
  if (restarts < 1) throw ConfigError("restarts must be at least 1");
  if (!(init_variance >= 0.0)) throw ConfigError("init_variance must be non-negative");
  if (!(energy_tol > 0.0) || !(grad_tol > 0.0)) throw ConfigError("tolerances must be positive");
  if (max_steps < 1) throw ConfigError("max_steps must be at least 1");
  if (lbfgs_memory < 1) throw ConfigError("lbfgs memory must be at least 1");
  if (chi_max < 0 || !(cutoff >= 0.0)) throw ConfigError("invalid truncation settings");
  if (workers < 1) throw ConfigError("workers must be at least 1");
}

nlohmann::json to_json(const OptimizationConfig& c) {
  return {{"loss", to_string(c.loss)},
          {"restarts", c.restarts},
          {"init_variance", c.init_variance},
          {"energy_tol", c.energy_tol},
          {"grad_tol", c.grad_tol},
          {"max_steps", c.max_steps},
          {"warm_start", c.warm_start},
          {"master_seed", c.master_seed},
          {"lbfgs_memory", c.lbfgs_memory},
          {"backend", c.backend == Backend::Auto ? "auto" : (c.backend == Backend::Dense ? "dense" : "mps")},
          {"chi_max", c.chi_max},
          {"cutoff", c.cutoff},
          {"gradient", c.gradient == GradientMode::Analytic ? "analytic" : "finite_difference"},
          {"infidelity_floor", kInfidelityFloor}};
}

VqeProblem::VqeProblem(Circuit circuit, Occupation initial, const PauliSum& hamiltonian, LossKind loss,
                       std::optional<MpsState> reference, Backend backend, int chi_max, double cutoff)
    : circuit_(std::move(circuit)), initial_(std::move(initial)), loss_(loss), cutoff_(cutoff),
      reference_(std::move(reference)) {
  const int n = circuit_.n_qubits();
  if (static_cast<int>(initial_.size()) != n || hamiltonian.n_qubits() != n) {
    throw DomainError("circuit, initial state and Hamiltonian sizes differ");
  }
  if (loss_ == LossKind::Overlap && !reference_) throw DomainError("overlap loss needs a reference state");
  if (reference_ && reference_->n_qubits() != n) throw DomainError("reference state size mismatch");
  dense_ = backend == Backend::Dense || (backend == Backend::Auto && n <= kDenseQubitLimit);
  chi_ = chi_max > 0 ? chi_max : full_bond_dimension(n);
  if (dense_) {
    if (n > 26) throw CapabilityError("dense backend limited to 26 qubits");
    h_dense_ = compile(hamiltonian);
    initial_dense_ = dense::basis_state(initial_);
    if (reference_) {
      reference_dense_ = reference_->to_dense();
      reference_dense_.normalize();
    }
  } else {
    h_mpo_ = mpo_from_pauli_sum(hamiltonian);
    initial_mps_ = MpsState::product_state(initial_, chi_, cutoff_);
    if (reference_) reference_->normalize();
  }
}

double VqeProblem::energy(const Eigen::VectorXd& params) const {
  if (dense_) {
    const Eigen::VectorXcd psi = evaluate_dense(circuit_, params, initial_dense_);
    return expectation(h_dense_, {psi.data(), static_cast<std::size_t>(psi.size())}).real();
  }
  return expectation(evaluate(circuit_, params, initial_mps_), *h_mpo_);
}

double VqeProblem::fidelity(const Eigen::VectorXd& params) const {
  if (!reference_) throw DomainError("no reference state");
  if (dense_) {
    const Eigen::VectorXcd psi = evaluate_dense(circuit_, params, initial_dense_);
    return std::norm(reference_dense_.dot(psi));
  }
  return std::norm(inner_product(*reference_, evaluate(circuit_, params, initial_mps_)));
}

double VqeProblem::loss(const Eigen::VectorXd& params) const {
  return loss_ == LossKind::Energy ? energy(params) : overlap_loss_from_fidelity(fidelity(params));
}

double VqeProblem::loss_and_gradient(const Eigen::VectorXd& params, Eigen::VectorXd& grad) const {
  if (dense_) {
    Eigen::VectorXcd psi = evaluate_dense(circuit_, params, initial_dense_);
    if (loss_ == LossKind::Energy) {
      Eigen::VectorXcd hpsi(psi.size());
      apply(h_dense_, {psi.data(), static_cast<std::size_t>(psi.size())},
            {hpsi.data(), static_cast<std::size_t>(hpsi.size())});
      const double e = psi.dot(hpsi).real();
      grad = adjoint_gradient_dense(circuit_, params, std::move(psi), std::move(hpsi));
      return e;
    }
    const cplx ov = reference_dense_.dot(psi);
    const double f = std::norm(ov);
    const double infidelity = 1.0 - f;
    if (infidelity <= kInfidelityFloor) {
      grad = Eigen::VectorXd::Zero(params.size());
      return std::log10(kInfidelityFloor);
    }
    Eigen::VectorXcd lambda = reference_dense_ * ov;
    const Eigen::VectorXd df = adjoint_gradient_dense(circuit_, params, std::move(psi), std::move(lambda));
    grad = -df / (infidelity * std::log(10.0));
    return std::log10(infidelity);
  }
  MpsState psi = evaluate(circuit_, params, initial_mps_);
  if (loss_ == LossKind::Energy) {
    const double e = expectation(psi, *h_mpo_);
    MpsState lambda = apply_mpo(*h_mpo_, psi, full_bond_dimension(psi.n_qubits()), cutoff_);
    grad = adjoint_gradient_mps(circuit_, params, std::move(psi), std::move(lambda));
    return e;
  }
  const cplx ov = inner_product(*reference_, psi);
  const double infidelity = 1.0 - std::norm(ov);
  if (infidelity <= kInfidelityFloor) {
    grad = Eigen::VectorXd::Zero(params.size());
    return std::log10(kInfidelityFloor);
  }
  MpsState lambda = *reference_;
  lambda.scale(ov);
  const Eigen::VectorXd df = adjoint_gradient_mps(circuit_, params, std::move(psi), std::move(lambda));
  grad = -df / (infidelity * std::log(10.0));
  return std::log10(infidelity);
}

Eigen::VectorXd VqeProblem::finite_difference_gradient(const Eigen::VectorXd& params, double step) const {
  Eigen::VectorXd grad(params.size());
  Eigen::VectorXd x = params;
  for (Eigen::Index k = 0; k < params.size(); ++k) {
    x[k] = params[k] + step;
    const double fp = loss(x);
    x[k] = params[k] - step;
    const double fm = loss(x);
    x[k] = params[k];
    grad[k] = (fp - fm) / (2.0 * step);
  }
  return grad;
}

MpsState VqeProblem::state(const Eigen::VectorXd& params) const {
  if (dense_) {
    return MpsState::from_dense(evaluate_dense(circuit_, params, initial_dense_), chi_, cutoff_);
  }
  return evaluate(circuit_, params, initial_mps_);
}

bool gradients_agree(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric, double rel) {
  if (analytic.size() != numeric.size()) return false;
  for (Eigen::Index k = 0; k < analytic.size(); ++k) {
    if (std::abs(analytic[k] - numeric[k]) > rel * std::max(std::abs(numeric[k]), 1e-3)) return false;
  }
  return true;
}

double energy_loss(const Eigen::VectorXd& params, const Circuit& circuit, const MpsState& initial,
                   const MpoOperator& h) {
  return expectation(evaluate(circuit, params, initial), h);
}

double overlap_loss(const Eigen::VectorXd& params, const Circuit& circuit, const MpsState& initial,
                    const MpsState& reference) {
  const MpsState psi = evaluate(circuit, params, initial);
  const double f = std::norm(inner_product(reference, psi)) / reference.norm_squared();
  return overlap_loss_from_fidelity(f);
}

namespace {

nlohmann::json trace_json(const std::vector<std::pair<int, double>>& trace) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [step, f] : trace) out.push_back({step, f});
  return out;
}

Objective make_objective(const VqeProblem& problem, GradientMode mode) {
  return [&problem, mode](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    if (mode == GradientMode::Analytic) return problem.loss_and_gradient(x, g);
    g = problem.finite_difference_gradient(x);
    return problem.loss(x);
  };
}

}  // namespace

nlohmann::json to_json(const VqeResult& r) {
  nlohmann::json restarts = nlohmann::json::array();
  for (const auto& rec : r.restarts) {
    nlohmann::json j = {{"index", rec.index},
                        {"seed", rec.seed},
                        {"final_loss", rec.final_loss},
                        {"final_energy", rec.final_energy},
                        {"termination", to_string(rec.termination)},
                        {"steps", rec.steps},
                        {"evaluations", rec.evaluations},
                        {"warm_steps", rec.warm_steps},
                        {"wall_time", rec.wall_time},
                        {"trace", trace_json(rec.trace)},
                        {"params", std::vector<double>(rec.params.data(), rec.params.data() + rec.params.size())}};
    j["fidelity"] = rec.fidelity ? nlohmann::json(*rec.fidelity) : nlohmann::json(nullptr);
    j["warm_energy"] = rec.warm_energy ? nlohmann::json(*rec.warm_energy) : nlohmann::json(nullptr);
    j["warm_termination"] =
        rec.warm_termination ? nlohmann::json(to_string(*rec.warm_termination)) : nlohmann::json(nullptr);
    restarts.push_back(std::move(j));
  }
  nlohmann::json out = {
      {"config", to_json(r.config)},
      {"ansatz",
       {{"family", to_string(r.ansatz.family)}, {"layers", r.ansatz.layers}, {"nx", r.ansatz.nx}, {"ny", r.ansatz.ny}}},
      {"n_parameters", r.n_parameters},
      {"valid", r.valid},
      {"restarts", restarts},
      {"generator", std::string(kGeneratorId)},
      {"versions",
       {{"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
        {"fmt", FMT_VERSION},
        {"nlohmann_json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR,
                                      NLOHMANN_JSON_VERSION_PATCH)}}}};
  if (r.valid) {
    out["best_index"] = r.best_index;
    out["best_energy"] = r.best_energy;
    out["best_params"] = std::vector<double>(r.best_params.data(), r.best_params.data() + r.best_params.size());
  }
  out["best_state_path"] = r.best_state_path;
  return out;
}

VqeResult run_vqe(const HubbardModel& model, AnsatzFamily family, int layers, const OptimizationConfig& config,
                  const std::optional<MpsState>& reference) {
  config.validate();
  const auto& geo = model.geometry;
  const QubitLayout layout(geo.n_sites());
  const Occupation initial = checkerboard_occupation(geo, layout);
  Circuit circuit = family == AnsatzFamily::UCCSD ? build_uccsd_ansatz(geo, initial) : build_ansatz(family, geo, layers);
  const VqeProblem target(circuit, initial, jordan_wigner(model, layout), config.loss, reference, config.backend,
                          config.chi_max, config.cutoff);
  std::optional<VqeProblem> warm;
  if (config.warm_start) {
    warm.emplace(circuit, initial, jordan_wigner(model.non_interacting(), layout), LossKind::Energy, std::nullopt,
                 config.backend, config.chi_max, config.cutoff);
  }
  LbfgsOptions lopt;
  lopt.memory = config.lbfgs_memory;
  lopt.energy_tol = config.energy_tol;
  lopt.grad_tol = config.grad_tol;
  lopt.max_steps = config.max_steps;

  VqeResult result;
  result.config = config;
  result.ansatz = circuit.descriptor();
  result.n_parameters = circuit.n_parameters();
  result.restarts.resize(config.restarts);

  auto run_restart = [&](int r) {
    const auto t0 = std::chrono::steady_clock::now();
    RestartRecord rec;
    rec.index = r;
    rec.seed = derive_seed(config.master_seed, static_cast<std::uint64_t>(r));
    GaussianSource gauss(rec.seed);
    const double sd = std::sqrt(config.init_variance);
    Eigen::VectorXd theta(circuit.n_parameters());
    for (auto& v : theta) v = sd * gauss.normal();
    if (config.check_gradient) {
      Eigen::VectorXd g;
      target.loss_and_gradient(theta, g);
      if (!gradients_agree(g, target.finite_difference_gradient(theta))) {
        throw NumericalError(fmt::format("analytic gradient check failed at restart {}", r));
      }
    }
    if (warm) {
      auto wr = lbfgs_minimize(make_objective(*warm, config.gradient), theta, lopt);
      rec.warm_energy = wr.f;
      rec.warm_termination = wr.termination;
      rec.warm_steps = wr.steps;
      theta = wr.x;
    }
    auto res = lbfgs_minimize(make_objective(target, config.gradient), theta, lopt);
    rec.final_loss = res.f;
    rec.termination = res.termination;
    rec.steps = res.steps;
    rec.evaluations = res.evaluations;
    rec.trace = std::move(res.trace);
    rec.params = res.x;
    rec.final_energy = config.loss == LossKind::Energy ? res.f : target.energy(res.x);
    if (target.has_reference()) rec.fidelity = target.fidelity(res.x);
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.restarts[r] = std::move(rec);
  };

  const int workers = std::min(config.workers, config.restarts);
  if (workers <= 1) {
    for (int r = 0; r < config.restarts; ++r) run_restart(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int r = next++; r < config.restarts; r = next++) run_restart(r);
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

  bool any_ok = false;
  for (const auto& rec : result.restarts) {
    if (rec.termination != Termination::LineSearchFailure ||
        (config.loss == LossKind::Overlap && rec.final_loss <= kOverlapRoundoffLoss)) {
      any_ok = true;
    }
  }
  if (!any_ok) return result;
  result.valid = true;
  for (const auto& rec : result.restarts) {
    if (result.best_index < 0 || rec.final_energy < result.best_energy) {
      result.best_index = rec.index;
      result.best_energy = rec.final_energy;
    }
  }
  result.best_params = result.restarts[result.best_index].params;
  return result;
}

}  // namespace tnvqe
