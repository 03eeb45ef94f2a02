#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bdca/network.hpp"
#include "bdca/solver.hpp"

namespace bdca {

enum class SourceKind { Builtin, Model, Generated };

struct ProblemSource {
  SourceKind kind = SourceKind::Builtin;
  std::string name;  // builtin name
  std::string path;  // model file
  int m = 0;         // generator parameters
  int n = 0;
  std::uint64_t seed = 0;
};

/// Regularization applied to network problems when the experiment does not set one.
inline constexpr double kDefaultNetworkRho = 100.0;

struct ExperimentSpec {
  std::vector<ProblemSource> problems;
  int trials = 10;
  double x0_lo = -2.0;
  double x0_hi = 2.0;
  /// Same starting point for every trial instead of sampling the box.
  std::optional<std::vector<double>> x0;
  int bdca_iters = 1000;
  /// Iteration cap for the DCA run; unset means 100 * bdca_iters.
  std::optional<int> dca_cap;
  Variant bdca_variant = Variant::BdcaQuadratic;
  SolverConfig cfg;
  /// Overrides every problem's regularization when set.
  std::optional<double> rho;
  std::uint64_t seed = 0;
  int workers = 1;

  int resolved_dca_cap() const { return dca_cap.value_or(100 * bdca_iters); }
};

/// Throws std::invalid_argument on an unusable spec.
void validate_spec(const ExperimentSpec& spec);

struct MatchedRun {
  SolveResult bdca;
  SolveResult dca;
  bool dca_cap_exceeded = false;
};

/// Runs BDCA for spec.bdca_iters iterations, then DCA from the same x0 until
/// it reaches BDCA's final objective value or the experiment's DCA cap.
MatchedRun run_matched_target(const DcProblem& problem, const Vector& x0, const ExperimentSpec& spec);

struct TrialResult {
  std::string model;
  int problem_index = 0;
  int trial = 0;
  Vector x0;
  double phi_x0 = 0.0;
  MatchedRun run;
  bool failed = false;
  std::string error;

  double iteration_ratio() const;
};

struct Stats {
  double min = 0.0;
  double max = 0.0;
  double avg = 0.0;
  friend bool operator==(const Stats&, const Stats&) = default;
};

struct ComparisonRow {
  std::string model;
  int m = 0;
  int n = 0;
  int trials = 0;
  int failed = 0;
  int dca_cap_exceeded = 0;
  double avg_phi_x0 = 0.0;
  double avg_phi_end = 0.0;      // BDCA
  double avg_phi_end_dca = 0.0;
  Stats bdca_time;  // seconds
  Stats bdca_iters;
  Stats dca_iters;
  Stats dca_time;   // seconds
  double ratio_iters = 0.0;  // avg DCA / avg BDCA
  double ratio_time = 0.0;

  bool partial() const { return failed > 0 || dca_cap_exceeded > 0; }
  friend bool operator==(const ComparisonRow&, const ComparisonRow&) = default;
};

struct ExperimentResult {
  std::vector<ComparisonRow> rows;
  std::vector<TrialResult> trials;  // sorted by (problem, trial)
};

/// A problem with its display name and sizes, ready to run.
struct ResolvedProblem {
  DcProblem problem;
  std::string name;
  int m = 0;
  int n = 0;
};

ResolvedProblem resolve_problem(const ProblemSource& source, const ExperimentSpec& spec);

/// Starting point for one trial; deterministic in (seed, problem, trial).
Vector trial_start(const ExperimentSpec& spec, int problem_index, int trial, int dimension);

ExperimentResult run_experiment(const ExperimentSpec& spec);

ComparisonRow aggregate(const std::string& model, int m, int n, const std::vector<TrialResult>& trials);

inline constexpr const char* kTableHeader =
    "model,m,n,trials,failed,dca_cap_exceeded,avg_phi_x0,avg_phi_end,avg_phi_end_dca,"
    "bdca_time_min,bdca_time_max,bdca_time_avg,bdca_iter_min,bdca_iter_max,bdca_iter_avg,"
    "dca_iter_min,dca_iter_max,dca_iter_avg,dca_time_min,dca_time_max,dca_time_avg,"
    "ratio_iter,ratio_time";

void export_table(const std::vector<ComparisonRow>& rows, const std::string& path);
void export_table(const std::vector<ComparisonRow>& rows, std::ostream& out);
std::vector<ComparisonRow> read_table(const std::string& path);

/// Writes traces/<model>_<trial>_<alg>.csv under dir for every trial.
void export_traces(const ExperimentResult& result, const std::string& dir);

/// rows.csv, traces/ and spec.json under dir.
void write_experiment(const ExperimentResult& result, const ExperimentSpec& spec, const std::string& dir);

nlohmann::json to_json(const SolverConfig& cfg);
SolverConfig solver_config_from_json(const nlohmann::json& j, SolverConfig base = {});
nlohmann::json to_json(const ExperimentSpec& spec);
ExperimentSpec experiment_spec_from_json(const nlohmann::json& j);

}  // namespace bdca
