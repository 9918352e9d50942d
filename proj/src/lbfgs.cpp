#include "tnvqe/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include <fmt/format.h>

#include "tnvqe/errors.hpp"

namespace tnvqe {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::EnergyTol: return "energy_tol";
    case Termination::GradTol: return "grad_tol";
    case Termination::MaxSteps: return "max_steps";
    case Termination::LineSearchFailure: return "line_search_failure";
  }
  return "?";
}

Termination termination_from_string(const std::string& name) {
  if (name == "energy_tol") return Termination::EnergyTol;
  if (name == "grad_tol") return Termination::GradTol;
  if (name == "max_steps") return Termination::MaxSteps;
  if (name == "line_search_failure") return Termination::LineSearchFailure;
  throw ConfigError(fmt::format("unknown termination reason '{}'", name));
}

namespace {

struct Point {
  double alpha = 0.0;
  double f = 0.0;
  double df = 0.0;  // directional derivative
  Eigen::VectorXd x;
  Eigen::VectorXd g;
};

class LineSearch {
 public:
  LineSearch(const Objective& obj, const LbfgsOptions& opt, const Point& start, const Eigen::VectorXd& dir,
             int& evaluations, Point& best)
      : obj_(obj), opt_(opt), p0_(start), dir_(dir), evaluations_(evaluations), best_(best) {}

  // Returns true and fills `out` on a strong-Wolfe point.
  bool run(double alpha1, Point& out) {
    const double alpha_max = 1e8;
    Point prev = p0_;
    double alpha = alpha1;
    for (int i = 1;; ++i) {
      if (evals_ >= opt_.max_line_search_evals) return false;
      Point cur = eval(alpha);
      if (!std::isfinite(cur.f)) {
        // Back off towards the start until the objective is finite again.
        alpha = 0.5 * (prev.alpha + alpha);
        continue;
      }
      if (cur.f > p0_.f + opt_.c1 * cur.alpha * p0_.df || (i > 1 && cur.f >= prev.f)) {
        return zoom(prev, cur, out);
      }
      if (std::abs(cur.df) <= -opt_.c2 * p0_.df) {
        out = std::move(cur);
        return true;
      }
      if (cur.df >= 0.0) return zoom(cur, prev, out);
      prev = std::move(cur);
      alpha = std::min(2.0 * alpha, alpha_max);
      if (prev.alpha >= alpha_max) return false;
    }
  }

 private:
  Point eval(double alpha) {
    Point p;
    p.alpha = alpha;
    p.x = p0_.x + alpha * dir_;
    p.g.resize(p.x.size());
    p.f = obj_(p.x, p.g);
    p.df = p.g.dot(dir_);
    ++evals_;
    ++evaluations_;
    if (std::isfinite(p.f) && p.f < best_.f) best_ = p;
    return p;
  }

  static double cubic_min(const Point& a, const Point& b) {
    const double d1 = a.df + b.df - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    const double disc = d1 * d1 - a.df * b.df;
    if (!(disc >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
    return b.alpha - (b.alpha - a.alpha) * (b.df + d2 - d1) / (b.df - a.df + 2.0 * d2);
  }

  bool zoom(Point lo, Point hi, Point& out) {
    while (evals_ < opt_.max_line_search_evals) {
      const double width = hi.alpha - lo.alpha;
      if (std::abs(width) <= 1e-16 * std::max(1.0, std::abs(lo.alpha))) return false;
      double alpha = cubic_min(lo, hi);
      const double a_min = std::min(lo.alpha, hi.alpha) + 0.1 * std::abs(width);
      const double a_max = std::max(lo.alpha, hi.alpha) - 0.1 * std::abs(width);
      if (!std::isfinite(alpha) || alpha < a_min || alpha > a_max) alpha = lo.alpha + 0.5 * width;
      Point cur = eval(alpha);
      if (!std::isfinite(cur.f) || cur.f > p0_.f + opt_.c1 * cur.alpha * p0_.df || cur.f >= lo.f) {
        hi = std::move(cur);
        continue;
      }
      if (std::abs(cur.df) <= -opt_.c2 * p0_.df) {
        out = std::move(cur);
        return true;
      }
      if (cur.df * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
      lo = std::move(cur);
    }
    return false;
  }

  const Objective& obj_;
  const LbfgsOptions& opt_;
  const Point& p0_;
  const Eigen::VectorXd& dir_;
  int& evaluations_;
  Point& best_;
  int evals_ = 0;
};

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& objective, Eigen::VectorXd x0, const LbfgsOptions& opt) {
  if (opt.memory < 1 || opt.max_steps < 1 || !(opt.energy_tol > 0.0) || !(opt.grad_tol > 0.0)) {
    throw DomainError("invalid L-BFGS options");
  }
  if (!x0.allFinite()) throw DomainError("L-BFGS start point is not finite");
  LbfgsResult res;
  Point cur;
  cur.x = std::move(x0);
  cur.g.resize(cur.x.size());
  cur.f = objective(cur.x, cur.g);
  res.evaluations = 1;
  if (!std::isfinite(cur.f)) throw NumericalError("objective is not finite at the start point");
  res.trace.emplace_back(0, cur.f);
  Point best = cur;
  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> memory;  // (s, y)

  auto finish = [&](const Point& p, Termination t) {
    res.x = p.x;
    res.f = p.f;
    res.grad_inf_norm = p.g.size() ? p.g.cwiseAbs().maxCoeff() : 0.0;
    res.termination = t;
    return res;
  };

  while (true) {
    const double f_prev = cur.f;
    if (cur.g.size() == 0 || cur.g.cwiseAbs().maxCoeff() == 0.0) {
      // Stationary start: the accepted step is a null step.
      ++res.steps;
      res.trace.emplace_back(res.steps, cur.f);
      return finish(cur, Termination::EnergyTol);
    }
    // Two-loop recursion.
    Eigen::VectorXd q = cur.g;
    std::vector<double> alphas(memory.size());
    for (int k = static_cast<int>(memory.size()) - 1; k >= 0; --k) {
      const auto& [s, y] = memory[k];
      alphas[k] = s.dot(q) / y.dot(s);
      q -= alphas[k] * y;
    }
    if (!memory.empty()) {
      const auto& [s, y] = memory.back();
      q *= s.dot(y) / y.dot(y);
    }
    for (std::size_t k = 0; k < memory.size(); ++k) {
      const auto& [s, y] = memory[k];
      const double beta = y.dot(q) / y.dot(s);
      q += (alphas[k] - beta) * s;
    }
    Eigen::VectorXd dir = -q;
    cur.df = cur.g.dot(dir);
    if (!(cur.df < 0.0)) {
      memory.clear();
      dir = -cur.g;
      cur.df = cur.g.dot(dir);
    }
    // Without curvature information the first trial step has unit length.
    const double alpha1 = memory.empty() ? 1.0 / dir.norm() : 1.0;
    cur.alpha = 0.0;
    Point next;
    LineSearch ls(objective, opt, cur, dir, res.evaluations, best);
    if (!ls.run(alpha1, next)) return finish(best, Termination::LineSearchFailure);

    Eigen::VectorXd s = next.x - cur.x;
    Eigen::VectorXd y = next.g - cur.g;
    if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
      memory.emplace_back(std::move(s), std::move(y));
      if (static_cast<int>(memory.size()) > opt.memory) memory.pop_front();
    }
    cur = std::move(next);
    ++res.steps;
    res.trace.emplace_back(res.steps, cur.f);
    if (std::abs(cur.f - f_prev) < opt.energy_tol) return finish(cur, Termination::EnergyTol);
    if (cur.g.cwiseAbs().maxCoeff() < opt.grad_tol) return finish(cur, Termination::GradTol);
    if (res.steps >= opt.max_steps) return finish(cur, Termination::MaxSteps);
  }
}

}  // namespace tnvqe
