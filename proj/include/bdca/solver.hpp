#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bdca/inner_solver.hpp"
#include "bdca/problem.hpp"

namespace bdca {

enum class Variant {
  DCA,                  // plain DC algorithm, x_{k+1} = y_k
  BdcaBacktracking,     // Armijo backtracking from y_k along d_k, starting at lambda_bar
  BdcaQuadratic,        // as above, seeded by a quadratic interpolation step
  FukushimaMine,        // Armijo search from x_k along d_k with steps beta^l
};

std::string to_string(Variant v);
/// Accepts dca, bdca-b, bdca-qi, fm (and the enum-style spellings).
Variant parse_variant(const std::string& s);

struct SolverConfig {
  Variant variant = Variant::BdcaQuadratic;
  double alpha = 0.4;
  double beta = 0.5;
  double lambda_bar = 50.0;
  double lambda_max = 200.0;
  int max_outer_iters = 1000;
  int max_backtracks = 60;
  /// Stationarity tolerances; unset means 1e-8 * sqrt(m).
  std::optional<double> tol_d;
  std::optional<double> tol_x;
  InnerConfig inner;
  /// Enables the proximal subproblem term |x - x_k|^2 / (2 c).
  std::optional<double> proximal_c;
  /// Stop as soon as phi(x_k) <= phi_target (matched-target runs).
  std::optional<double> phi_target;
  /// Keep every iterate x_0, x_1, ... in SolveResult::iterates.
  bool record_iterates = false;
};

/// Throws std::invalid_argument on a malformed configuration; returns
/// warnings for settings outside the convergence theory.
std::vector<std::string> validate_config(const SolverConfig& cfg, const DcProblem& problem);

enum class SolveStatus { StationaryPoint, MaxIters, LineSearchFailure, NumericalFailure, TargetReached };

std::string to_string(SolveStatus s);

/// Carries a failure status out of a solver step.
class SolverError : public std::runtime_error {
 public:
  SolverError(SolveStatus status, const std::string& what)
      : std::runtime_error(what), status_(status) {}
  SolveStatus status() const { return status_; }

 private:
  SolveStatus status_;
};

/// One outer iteration. Iterates satisfy x_{k+1} = y_k + lambda * d_k, so
/// lambda is 0 for DCA and beta^l - 1 for Fukushima-Mine.
struct TraceRecord {
  int k = 0;
  double phi_x = 0.0;
  double phi_y = 0.0;
  double norm_d = 0.0;
  double lambda = 0.0;
  int backtracks = 0;
  int inner_iters = 0;
  double elapsed_ms = 0.0;  // cumulative since the start of the solve
  // Not part of the CSV export; NaN when unknown.
  double slope = std::numeric_limits<double>::quiet_NaN();     // <grad phi(y_k), d_k>
  double phi_next = std::numeric_limits<double>::quiet_NaN();  // phi(x_{k+1})
};

using Trace = std::vector<TraceRecord>;

struct SolveResult {
  Vector x_final;
  double phi_final = 0.0;
  SolveStatus status = SolveStatus::MaxIters;
  Trace trace;
  double norm_d_final = std::numeric_limits<double>::quiet_NaN();
  /// Number of accepted moves x_k -> x_{k+1}.
  int iterations = 0;
  double elapsed_ms = 0.0;
  std::string message;
  std::vector<std::string> warnings;
  std::vector<Vector> iterates;
};

struct DcaStep {
  Vector y;
  int inner_iters = 0;
};

/// Solves the convex subproblem at x_k, warm-started at x_k.
/// Throws SolverError(NumericalFailure).
DcaStep dca_step(const DcProblem& problem, const Vector& x_k, const SolverConfig& cfg);

/// <grad phi(y_k), d_k>.
double descent_slope(const DcProblem& problem, const Vector& y_k, const Vector& d_k);

struct BacktrackResult {
  double lambda = 0.0;
  int backtracks = 0;
  double phi_trial = 0.0;  // phi(y + lambda d) at the accepted lambda
};

/// First lambda in {lambda_init * beta^i} with
///   phi(y + lambda d) <= phi(y) - alpha lambda |d|^2.
/// Non-finite trial values count as failures. Throws
/// SolverError(LineSearchFailure) after max_backtracks reductions.
BacktrackResult backtrack(const DcProblem& problem, const Vector& y_k, const Vector& d_k,
                          double lambda_init, const SolverConfig& cfg);
BacktrackResult backtrack(const DcProblem& problem, const Vector& y_k, const Vector& d_k,
                          double phi_y, double lambda_init, const SolverConfig& cfg);

/// Minimizer of the quadratic through phi(0), phi'(0), phi(lambda_bar), or
/// nullopt when that quadratic is not strictly convex.
std::optional<double> quad_interp_lambda(double phi0, double dphi0, double phi_at_lambda_bar,
                                         double lambda_bar);

/// Initial trial step for the quadratic-interpolation variant.
double bdca_qi_select(const DcProblem& problem, const Vector& y_k, const Vector& d_k,
                      const SolverConfig& cfg);
double bdca_qi_select(const DcProblem& problem, const Vector& y_k, const Vector& d_k,
                      double phi_y, double slope, const SolverConfig& cfg);

struct FmStep {
  Vector x_next;
  int l = 0;
};

/// Smallest l >= 0 with phi(x + beta^l d) <= phi(x) - alpha beta^l |d|^2.
/// Throws SolverError(LineSearchFailure) after max_backtracks.
FmStep fm_step(const DcProblem& problem, const Vector& x_k, const Vector& y_k,
               const SolverConfig& cfg);

SolveResult solve(const DcProblem& problem, const Vector& x0, const SolverConfig& cfg);

/// CSV header of exported traces.
inline constexpr const char* kTraceHeader =
    "k,phi_x,phi_y,norm_d,lambda,backtracks,inner_iters,elapsed_ms";

void write_trace_csv(const Trace& trace, std::ostream& out);
void write_trace_csv(const Trace& trace, const std::string& path);
/// Throws std::runtime_error with a line number on malformed input.
Trace read_trace_csv(std::istream& in);
Trace read_trace_csv(const std::string& path);

}  // namespace bdca
