#pragma once

#include <Eigen/Dense>
#include <functional>

namespace entangle {

struct MinimizeOptions {
  int max_iterations = 2000;
  double grad_tol = 1e-8; // stop when the 2-norm of the gradient drops below this
  double f_tol = 1e-12;   // stop when an accepted step decreases f by less than this
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Objective callback: returns f(x) and, when grad is non-null, writes df/dx into it.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

// Dense BFGS with backtracking line search. Problem sizes here stay below ~100
// parameters, so the full inverse-Hessian update is cheaper than anything fancier.
MinimizeResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0,
                             const MinimizeOptions& opts = {});

// Wraps a gradient-free function with a central-difference gradient.
Objective with_numeric_gradient(std::function<double(const Eigen::VectorXd&)> f,
                                double step = 1e-6);

} // namespace entangle
