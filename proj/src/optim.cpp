#include "entangle/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace entangle {

MinimizeResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0,
                             const MinimizeOptions& opts) {
  const int n = static_cast<int>(x0.size());
  if (n == 0) throw std::invalid_argument("minimize_bfgs: empty parameter vector");

  Eigen::VectorXd x = std::move(x0);
  Eigen::VectorXd g(n), g_new(n);
  double fx = f(x, &g);

  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  bool first_update = true;

  MinimizeResult res;
  res.converged = false;

  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    double gnorm = g.norm();
    if (gnorm < opts.grad_tol) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd p = -(H * g);
    double slope = g.dot(p);
    if (slope >= 0.0) { // H lost positive definiteness; fall back to steepest descent
      p = -g;
      slope = -gnorm * gnorm;
      H.setIdentity();
      first_update = true;
    }

    // Armijo backtracking
    const double c1 = 1e-4;
    double alpha = 1.0;
    double fx_new = fx;
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      x_new = x + alpha * p;
      fx_new = f(x_new, &g_new);
      if (std::isfinite(fx_new) && fx_new <= fx + c1 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;

    Eigen::VectorXd s = x_new - x;
    Eigen::VectorXd y = g_new - g;
    double decrease = fx - fx_new;
    x = x_new;
    fx = fx_new;
    g = g_new;

    if (decrease < opts.f_tol) {
      res.converged = true;
      ++it;
      break;
    }

    double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (first_update) {
        H *= sy / y.squaredNorm();
        first_update = false;
      }
      Eigen::VectorXd Hy = H * y;
      double yHy = y.dot(Hy);
      // standard BFGS inverse update
      H += ((sy + yHy) / (sy * sy)) * (s * s.transpose());
      H -= (Hy * s.transpose() + s * Hy.transpose()) / sy;
    }
  }

  res.x = std::move(x);
  res.value = fx;
  res.grad_norm = g.norm();
  res.iterations = it;
  if (res.grad_norm < opts.grad_tol) res.converged = true;
  return res;
}

Objective with_numeric_gradient(std::function<double(const Eigen::VectorXd&)> f,
                                double step) {
  return [f = std::move(f), step](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    double fx = f(x);
    if (grad) {
      grad->resize(x.size());
      Eigen::VectorXd xp = x;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        double xi = x[i];
        xp[i] = xi + step;
        double fp = f(xp);
        xp[i] = xi - step;
        double fm = f(xp);
        xp[i] = xi;
        (*grad)[i] = (fp - fm) / (2.0 * step);
      }
    }
    return fx;
  };
}

} // namespace entangle
