#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bdca/solver.hpp"

namespace bdca {

/// Checks s_k^alpha <= beta (s_k - s_{k+1}) + 1e-12 for every k >= from_index
/// with s_k > 0 (0^0 = 1; terms after the sequence reaches zero are not
/// constrained). Returns false if the tail from from_index increases.
bool verify_rate_inequality(std::span<const double> s, double alpha, double beta, std::size_t from_index = 0);

enum class RateRegime { Finite, Linear, Sublinear, Inconclusive };

std::string to_string(RateRegime r);

struct RateReport {
  RateRegime regime = RateRegime::Inconclusive;
  std::optional<double> rate;      // Linear: asymptotic ratio s_{k+1}/s_k
  std::optional<double> exponent;  // Sublinear: p in s_k ~ k^-p
  double fit_residual = 0.0;
  int samples_used = 0;
};

struct RateConfig {
  /// Finite when some s_k <= finite_rel_tol * s_0.
  double finite_rel_tol = 1e-14;
  /// Fraction of the sequence (at the end) used for fitting.
  double window_fraction = 1.0 / 3.0;
  /// Upper bound on the variance of successive ratios in the window.
  double ratio_variance_max = 0.01;
  /// Allowed relative drift of 1 - ratio between the two halves of the
  /// window; power laws drift by ~20% regardless of length.
  double gap_drift_max = 0.1;
  std::size_t min_length = 10;
};

RateReport classify_rate(std::span<const double> s, const RateConfig& cfg = {});

struct Violation {
  int iteration = 0;
  std::string id;  // "decrease", "descent_slope", "combined_decrease", "monotone", "summability"
  double lhs = 0.0;
  double rhs = 0.0;
};

struct AuditReport {
  std::vector<Violation> violations;
  double audit_tol = 1e-6;  // relative factor: tolerance is audit_tol * (1 + |phi(x_k)|)
  bool passed = true;
  int iterations_checked = 0;
  bool slope_checked = false;
};

/// Strong-convexity data needed to audit a trace.
struct ProblemModuli {
  double sigma_g = 0.0;
  double sigma_h = 0.0;
  double rho = 0.0;

  static ProblemModuli of(const DcProblem& p) { return {p.sigma_g(), p.sigma_h(), p.rho()}; }
  double decrease() const { return 0.5 * (sigma_g + sigma_h) + rho; }
  double descent() const { return sigma_h + rho; }
};

/// Re-checks the per-iteration decrease, descent-slope and combined
/// decrease inequalities plus prefix summability over a completed trace.
/// The slope check runs only for records that carry a slope. Records
/// without phi_next take it from the following record.
AuditReport audit_trace(const Trace& trace, const ProblemModuli& moduli, const SolverConfig& cfg,
                        double audit_tol = 1e-6);

std::string to_json(const RateReport& report);
std::string to_json(const AuditReport& report);

}  // namespace bdca
