#pragma once

// Independent reference computations for the test suites. Nothing here calls
// into the solver paths it is used to check.

#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include <Eigen/Dense>

namespace oracle {

/// Grid minimizer of a scalar function over [lo, hi] with the given step.
inline double grid_argmin(const std::function<double(double)>& f, double lo, double hi, double step) {
  double best = lo, best_val = std::numeric_limits<double>::infinity();
  const long count = std::lround((hi - lo) / step);
  for (long i = 0; i <= count; ++i) {
    const double t = lo + step * static_cast<double>(i);
    const double v = f(t);
    if (v < best_val) {
      best_val = v;
      best = t;
    }
  }
  return best;
}

/// Quadratic through (0, phi0), slope dphi0 at 0, and (lambda_bar, phi_bar).
inline std::function<double(double)> interpolating_quadratic(double phi0, double dphi0, double phi_bar,
                                                            double lambda_bar) {
  const double a = (phi_bar - phi0 - lambda_bar * dphi0) / (lambda_bar * lambda_bar);
  return [=](double t) { return a * t * t + dphi0 * t + phi0; };
}

/// Central-difference gradient of a scalar function.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x) {
  const double h = 1e-6 * (1.0 + x.norm());
  Eigen::VectorXd g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

/// Central-difference Jacobian of a vector function (columns = partials).
inline Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x) {
  const double h = 1e-6 * (1.0 + x.norm());
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd J(f0.size(), x.size());
  for (int i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    J.col(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return J;
}

inline double rel_err(const Eigen::MatrixXd& approx, const Eigen::MatrixXd& exact) {
  return (approx - exact).norm() / std::max(exact.norm(), 1.0);
}

inline Eigen::VectorXd uniform_vector(int n, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(lo, hi);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

}  // namespace oracle
