#include "bdca/inner_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

namespace bdca {

PartEvaluation SubproblemSpec::objective(const Vector& x, Order order) const {
  PartEvaluation e = eval_g(x, order);
  if (!std::isfinite(e.value)) {
    e.value = std::numeric_limits<double>::infinity();
    return e;
  }
  e.value -= linear_term.dot(x);
  if (order != Order::Value) e.gradient -= linear_term;
  if (proximal_center) {
    const Vector shift = x - *proximal_center;
    e.value += proximal_weight * shift.squaredNorm();
    if (order != Order::Value) e.gradient += 2.0 * proximal_weight * shift;
    if (order == Order::Hessian) e.hessian.diagonal().array() += 2.0 * proximal_weight;
  }
  return e;
}

SpdSolution spd_solve(const Matrix& hessian, const Vector& rhs, double damping_floor) {
  const double hnorm = hessian.cwiseAbs().rowwise().sum().maxCoeff();
  if (!std::isfinite(hnorm) || !rhs.allFinite()) throw NumericalError("spd_solve: non-finite input");
  const double cap = 1e6 * std::max(hnorm, 1.0);
  const double bnorm = rhs.norm();

  Matrix shifted = hessian;
  double mu = 0.0;
  while (mu <= cap) {
    if (mu > 0.0) shifted.diagonal() = hessian.diagonal().array() + mu;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() == Eigen::Success) {
      Vector d = llt.solve(rhs);
      const double res = (shifted * d - rhs).norm();
      if (d.allFinite() && res <= 1e-10 * std::max(bnorm, std::numeric_limits<double>::min()))
        return {std::move(d), mu};
      if (bnorm == 0.0) return {Vector::Zero(rhs.size()), mu};
    }
    mu = (mu == 0.0) ? damping_floor : 4.0 * mu;
  }
  throw NumericalError("spd_solve: damping exceeded cap without a successful factorization");
}

InnerResult minimize_subproblem(const SubproblemSpec& spec, const Vector& x_init,
                                const InnerConfig& cfg) {
  if (!x_init.allFinite()) throw NumericalError("inner solver: non-finite starting point");
  const double tol = cfg.tol_grad * std::max(1.0, spec.linear_term.norm());
  constexpr double kSlope = 1e-4;
  constexpr int kMaxHalvings = 60;

  Vector y = x_init;
  PartEvaluation cur = spec.objective(y, Order::Hessian);
  for (int iter = 0;; ++iter) {
    if (!std::isfinite(cur.value) || !cur.gradient.allFinite() || !cur.hessian.allFinite())
      throw NumericalError("inner solver: non-finite objective or derivatives");
    const double residual = cur.gradient.norm();
    if (residual <= tol) return {std::move(y), iter, residual, false};
    if (iter >= cfg.max_iters)
      throw NumericalError("inner solver: iteration cap reached with residual " +
                           std::to_string(residual));

    const SpdSolution step = spd_solve(cur.hessian, -cur.gradient, cfg.damping_floor);
    const double slope = cur.gradient.dot(step.d);

    if (step.damping == 0.0 && step.d.norm() <= cfg.tol_step * (1.0 + y.norm())) {
      PartEvaluation full = spec.objective(y + step.d, Order::Hessian);
      if (std::isfinite(full.value) && full.value <= cur.value && full.gradient.allFinite()) {
        y += step.d;
        cur = std::move(full);
        ++iter;
      }
      return {std::move(y), iter, cur.gradient.norm(), true};
    }

    // Predicted decrease below the resolution of F: judge the step by the
    // gradient residual instead, allowing F to move by rounding only.
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(cur.value));
    if (-slope <= noise) {
      PartEvaluation full = spec.objective(y + step.d, Order::Hessian);
      if (std::isfinite(full.value) && full.gradient.allFinite() && full.value <= cur.value + noise &&
          full.gradient.norm() < residual) {
        y += step.d;
        cur = std::move(full);
        continue;
      }
      return {std::move(y), iter, residual, true};
    }

    double t = 1.0;
    bool accepted = false;
    Vector trial;
    for (int h = 0; h < kMaxHalvings; ++h, t *= 0.5) {
      trial = y + t * step.d;
      const double val = spec.objective(trial, Order::Value).value;
      if (std::isfinite(val) && val <= cur.value + kSlope * t * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw NumericalError("inner solver: line search made no progress at residual " +
                           std::to_string(residual));
    y = std::move(trial);
    cur = spec.objective(y, Order::Hessian);
  }
}

}  // namespace bdca
