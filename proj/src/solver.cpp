#include "bdca/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace bdca {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::DCA: return "dca";
    case Variant::BdcaBacktracking: return "bdca-b";
    case Variant::BdcaQuadratic: return "bdca-qi";
    case Variant::FukushimaMine: return "fm";
  }
  return "?";
}

Variant parse_variant(const std::string& s) {
  if (s == "dca" || s == "DCA") return Variant::DCA;
  if (s == "bdca-b" || s == "BDCA_B") return Variant::BdcaBacktracking;
  if (s == "bdca-qi" || s == "BDCA_QI") return Variant::BdcaQuadratic;
  if (s == "fm" || s == "FM") return Variant::FukushimaMine;
  throw std::invalid_argument("unknown variant '" + s + "' (expected dca|bdca-b|bdca-qi|fm)");
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::StationaryPoint: return "StationaryPoint";
    case SolveStatus::MaxIters: return "MaxIters";
    case SolveStatus::LineSearchFailure: return "LineSearchFailure";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
    case SolveStatus::TargetReached: return "TargetReached";
  }
  return "?";
}

std::vector<std::string> validate_config(const SolverConfig& cfg, const DcProblem& problem) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(cfg.alpha > 0.0, "alpha must be positive");
  require(cfg.beta > 0.0 && cfg.beta < 1.0, "beta must lie in (0,1)");
  require(cfg.lambda_bar > 0.0, "lambda_bar must be positive");
  require(cfg.lambda_max > cfg.lambda_bar, "lambda_max must exceed lambda_bar");
  require(cfg.max_outer_iters >= 0, "max_outer_iters must be nonnegative");
  require(cfg.max_backtracks > 0, "max_backtracks must be positive");
  require(!cfg.tol_d || *cfg.tol_d >= 0.0, "tol_d must be nonnegative");
  require(!cfg.tol_x || *cfg.tol_x >= 0.0, "tol_x must be nonnegative");
  require(!cfg.proximal_c || *cfg.proximal_c > 0.0, "proximal_c must be positive");
  require(cfg.inner.tol_grad > 0.0, "inner tol_grad must be positive");
  require(cfg.inner.max_iters > 0, "inner max_iters must be positive");
  require(cfg.inner.damping_floor > 0.0, "inner damping_floor must be positive");
  require(problem.modulus_h() > 0.0, "h must be strongly convex (sigma_h + rho > 0)");

  std::vector<std::string> warnings;
  if (problem.modulus_g() <= 0.0 && !cfg.proximal_c)
    warnings.push_back("g is not strongly convex (sigma_g + rho = 0); subproblem uniqueness is not guaranteed");
  if (cfg.variant != Variant::DCA && cfg.alpha >= problem.modulus_h()) {
    std::ostringstream os;
    os << "alpha = " << cfg.alpha << " >= sigma_h + rho = " << problem.modulus_h()
       << "; finite termination of the line search is not guaranteed";
    warnings.push_back(os.str());
  }
  return warnings;
}

DcaStep dca_step(const DcProblem& problem, const Vector& x_k, const SolverConfig& cfg) {
  if (!x_k.allFinite()) throw SolverError(SolveStatus::NumericalFailure, "dca_step: non-finite iterate");
  const PartEvaluation h = problem.eval_h(x_k, Order::Gradient);
  if (!std::isfinite(h.value) || !h.gradient.allFinite())
    throw SolverError(SolveStatus::NumericalFailure, "dca_step: non-finite gradient of h");

  SubproblemSpec spec;
  spec.eval_g = [&problem](const Vector& x, Order order) { return problem.eval_g(x, order); };
  spec.linear_term = h.gradient;
  spec.modulus = std::max(problem.modulus_g(), 0.0);
  if (cfg.proximal_c) {
    spec.proximal_center = x_k;
    spec.proximal_weight = 1.0 / (2.0 * *cfg.proximal_c);
    spec.modulus += 1.0 / *cfg.proximal_c;
  }
  try {
    InnerResult r = minimize_subproblem(spec, x_k, cfg.inner);
    return {std::move(r.y), r.iters};
  } catch (const NumericalError& e) {
    throw SolverError(SolveStatus::NumericalFailure, e.what());
  }
}

double descent_slope(const DcProblem& problem, const Vector& y_k, const Vector& d_k) {
  if (d_k.squaredNorm() == 0.0) return 0.0;
  return problem.grad_phi(y_k).dot(d_k);
}

BacktrackResult backtrack(const DcProblem& problem, const Vector& y_k, const Vector& d_k,
                          double lambda_init, const SolverConfig& cfg) {
  return backtrack(problem, y_k, d_k, problem.phi(y_k), lambda_init, cfg);
}

BacktrackResult backtrack(const DcProblem& problem, const Vector& y_k, const Vector& d_k,
                          double phi_y, double lambda_init, const SolverConfig& cfg) {
  const double dd = d_k.squaredNorm();
  double lambda = lambda_init;
  for (int i = 0; i <= cfg.max_backtracks; ++i, lambda *= cfg.beta) {
    const double trial = problem.phi(y_k + lambda * d_k);
    if (std::isfinite(trial) && trial <= phi_y - cfg.alpha * lambda * dd) return {lambda, i, trial};
  }
  throw SolverError(SolveStatus::LineSearchFailure,
                    "backtracking exhausted " + std::to_string(cfg.max_backtracks) + " reductions");
}

std::optional<double> quad_interp_lambda(double phi0, double dphi0, double phi_at_lambda_bar,
                                         double lambda_bar) {
  if (!std::isfinite(phi0) || !std::isfinite(dphi0) || !std::isfinite(phi_at_lambda_bar))
    return std::nullopt;
  if (!(phi_at_lambda_bar > phi0 + lambda_bar * dphi0)) return std::nullopt;
  const double curvature = phi_at_lambda_bar - phi0 - dphi0 * lambda_bar;
  if (!(curvature > 0.0)) return std::nullopt;
  return -dphi0 * lambda_bar * lambda_bar / (2.0 * curvature);
}

double bdca_qi_select(const DcProblem& problem, const Vector& y_k, const Vector& d_k,
                      const SolverConfig& cfg) {
  return bdca_qi_select(problem, y_k, d_k, problem.phi(y_k), descent_slope(problem, y_k, d_k), cfg);
}

double bdca_qi_select(const DcProblem& problem, const Vector& y_k, const Vector& d_k,
                      double phi_y, double slope, const SolverConfig& cfg) {
  const double phi_bar = problem.phi(y_k + cfg.lambda_bar * d_k);
  const std::optional<double> hat = quad_interp_lambda(phi_y, slope, phi_bar, cfg.lambda_bar);
  if (!hat || !(*hat > 0.0)) return cfg.lambda_bar;
  if (problem.phi(y_k + *hat * d_k) < phi_bar) return std::min(*hat, cfg.lambda_max);
  return cfg.lambda_bar;
}

FmStep fm_step(const DcProblem& problem, const Vector& x_k, const Vector& y_k,
               const SolverConfig& cfg) {
  const Vector d = y_k - x_k;
  const double dd = d.squaredNorm();
  if (dd == 0.0) return {x_k, 0};
  const double phi_x = problem.phi(x_k);
  double t = 1.0;
  for (int l = 0; l <= cfg.max_backtracks; ++l, t *= cfg.beta) {
    Vector trial = x_k + t * d;
    const double v = problem.phi(trial);
    if (std::isfinite(v) && v <= phi_x - cfg.alpha * t * dd) return {std::move(trial), l};
  }
  throw SolverError(SolveStatus::LineSearchFailure,
                    "Armijo search exhausted " + std::to_string(cfg.max_backtracks) + " reductions");
}

SolveResult solve(const DcProblem& problem, const Vector& x0, const SolverConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  if (x0.size() != problem.dimension())
    throw std::invalid_argument("solve: x0 has length " + std::to_string(x0.size()) +
                                ", expected " + std::to_string(problem.dimension()));

  SolveResult result;
  result.warnings = validate_config(cfg, problem);
  const double default_tol = 1e-8 * std::sqrt(static_cast<double>(problem.dimension()));
  const double tol_d = cfg.tol_d.value_or(default_tol);
  const double tol_x = cfg.tol_x.value_or(default_tol);

  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double, std::milli>(Clock::now() - start).count(); };

  Vector x = x0;
  double phi_x = problem.phi(x);
  if (!x0.allFinite() || !std::isfinite(phi_x)) {
    result.x_final = x0;
    result.phi_final = phi_x;
    result.status = SolveStatus::NumericalFailure;
    result.message = "objective is not finite at x0";
    return result;
  }

  if (cfg.record_iterates) result.iterates.push_back(x);
  for (int k = 0;; ++k) {
    if (cfg.phi_target && phi_x <= *cfg.phi_target) {
      result.status = SolveStatus::TargetReached;
      break;
    }
    if (k >= cfg.max_outer_iters) {
      result.status = SolveStatus::MaxIters;
      break;
    }
    try {
      const DcaStep step = dca_step(problem, x, cfg);
      const Vector d = step.y - x;
      TraceRecord rec;
      rec.k = k;
      rec.phi_x = phi_x;
      rec.phi_y = problem.phi(step.y);
      rec.norm_d = d.norm();
      rec.inner_iters = step.inner_iters;
      result.norm_d_final = rec.norm_d;
      if (!std::isfinite(rec.phi_y))
        throw SolverError(SolveStatus::NumericalFailure, "objective is not finite at the DCA point");
      rec.slope = descent_slope(problem, step.y, d);

      if (rec.norm_d <= tol_d) {
        rec.phi_next = phi_x;
        rec.elapsed_ms = elapsed();
        result.trace.push_back(rec);
        result.status = SolveStatus::StationaryPoint;
        break;
      }

      Vector x_next;
      switch (cfg.variant) {
        case Variant::DCA:
          x_next = step.y;
          rec.phi_next = rec.phi_y;
          break;
        case Variant::BdcaBacktracking:
        case Variant::BdcaQuadratic: {
          const double lambda0 = cfg.variant == Variant::BdcaQuadratic
                                     ? bdca_qi_select(problem, step.y, d, rec.phi_y, rec.slope, cfg)
                                     : cfg.lambda_bar;
          const BacktrackResult bt = backtrack(problem, step.y, d, rec.phi_y, lambda0, cfg);
          rec.lambda = bt.lambda;
          rec.backtracks = bt.backtracks;
          rec.phi_next = bt.phi_trial;
          x_next = step.y + bt.lambda * d;
          break;
        }
        case Variant::FukushimaMine: {
          FmStep fm = fm_step(problem, x, step.y, cfg);
          rec.lambda = std::pow(cfg.beta, fm.l) - 1.0;
          rec.backtracks = fm.l;
          rec.phi_next = problem.phi(fm.x_next);
          x_next = std::move(fm.x_next);
          break;
        }
      }

      const double move = (x_next - x).norm();
      x = std::move(x_next);
      phi_x = rec.phi_next;
      ++result.iterations;
      if (cfg.record_iterates) result.iterates.push_back(x);
      rec.elapsed_ms = elapsed();
      result.trace.push_back(rec);
      if (move <= tol_x && (cfg.variant != Variant::FukushimaMine || rec.norm_d <= tol_d)) {
        result.status = SolveStatus::StationaryPoint;
        break;
      }
    } catch (const SolverError& e) {
      result.status = e.status();
      result.message = e.what();
      break;
    } catch (const std::domain_error& e) {
      result.status = SolveStatus::NumericalFailure;
      result.message = e.what();
      break;
    }
  }

  result.x_final = x;
  result.phi_final = phi_x;
  result.elapsed_ms = elapsed();
  return result;
}

}  // namespace bdca
