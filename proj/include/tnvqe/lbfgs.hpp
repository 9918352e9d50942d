#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace tnvqe {

enum class Termination { EnergyTol, GradTol, MaxSteps, LineSearchFailure };

std::string to_string(Termination t);
Termination termination_from_string(const std::string& name);

struct LbfgsOptions {
  int memory = 10;
  double energy_tol = 1e-7;  // |f_k - f_{k-1}| between consecutive accepted steps
  double grad_tol = 1e-6;    // infinity norm
  int max_steps = 1000;
  double c1 = 1e-4;          // sufficient decrease
  double c2 = 0.9;           // strong curvature
  int max_line_search_evals = 30;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  double grad_inf_norm = 0.0;
  int steps = 0;        // accepted steps
  int evaluations = 0;  // calls of the objective
  Termination termination = Termination::MaxSteps;
  std::vector<std::pair<int, double>> trace;  // (step, f), step 0 = start
};

// Objective: returns f(x) and writes the gradient.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

// Limited-memory BFGS with a strong-Wolfe line search. Termination is tested
// only after an accepted step, in the order energy_tol, grad_tol, max_steps.
// A zero gradient yields an accepted null step. On line-search failure the
// best point seen so far is returned.
LbfgsResult lbfgs_minimize(const Objective& objective, Eigen::VectorXd x0, const LbfgsOptions& options);

}  // namespace tnvqe
