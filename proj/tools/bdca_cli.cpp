// bdca: command-line front end for the DC solvers, experiments and checks.
//
// Exit codes: 0 success, 1 failure (solver failure status, bad input file,
// audit violations, schema error), 2 usage or validation error. `validate`
// additionally returns 2 when the model does not conserve mass.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bdca/analysis.hpp"
#include "bdca/harness.hpp"
#include "bdca/network.hpp"
#include "bdca/solver.hpp"

using namespace bdca;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

/// Usage problem detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

/// Solver flags shared by solve and compare.
struct SolverFlags {
  std::string variant;
  double alpha = 0, beta = 0, lambda_bar = 0, lambda_max = 0, tol = 0;
  int max_iters = 0;
  CLI::Option *o_alpha{}, *o_beta{}, *o_lambda_bar{}, *o_lambda_max{}, *o_tol{}, *o_max_iters{};

  void attach(CLI::App* app, bool with_variant) {
    if (with_variant) app->add_option("--variant", variant, "dca | bdca-b | bdca-qi | fm");
    o_alpha = app->add_option("--alpha", alpha, "Armijo constant (default 0.4)");
    o_beta = app->add_option("--beta", beta, "backtracking factor in (0,1) (default 0.5)");
    o_lambda_bar = app->add_option("--lambda-bar", lambda_bar, "initial trial step (default 50)");
    o_lambda_max = app->add_option("--lambda-max", lambda_max, "cap on interpolated steps (default 200)");
    o_max_iters = app->add_option("--max-iters", max_iters, "outer iteration cap (default 1000)");
    o_tol = app->add_option("--tol", tol, "stationarity tolerance on |d| and |x_{k+1} - x_k|");
  }

  void apply(SolverConfig& cfg) const {
    if (!variant.empty()) cfg.variant = parse_variant(variant);
    if (o_alpha->count()) cfg.alpha = alpha;
    if (o_beta->count()) cfg.beta = beta;
    if (o_lambda_bar->count()) cfg.lambda_bar = lambda_bar;
    if (o_lambda_max->count()) cfg.lambda_max = lambda_max;
    if (o_max_iters->count()) cfg.max_outer_iters = max_iters;
    if (o_tol->count()) cfg.tol_d = cfg.tol_x = tol;
  }
};

json source_json(const ProblemSource& src) {
  ExperimentSpec s;
  s.problems = {src};
  return to_json(s)["problems"][0];
}

ProblemSource source_from_json(const json& j) {
  return experiment_spec_from_json(json{{"problems", json::array({j})}}).problems.at(0);
}

ProblemSource parse_generate(const std::string& text) {
  ProblemSource src;
  src.kind = SourceKind::Generated;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> src.m >> c1 >> src.n >> c2 >> src.seed) || c1 != ',' || c2 != ',')
    throw UsageError("--generate expects m,n,seed, got '" + text + "'");
  return src;
}

// ---------------------------------------------------------------- solve

struct SolveArgs {
  std::string builtin, model, config, trace_out;
  std::vector<double> x0;
  std::uint64_t x0_seed = 0;
  double rho = 0;
  CLI::Option* o_rho{};
  SolverFlags flags;
};

int run_solve(const SolveArgs& a) {
  json base = json::object();
  if (!a.config.empty()) base = read_json_file(a.config);
  for (const auto& [key, _] : base.items())
    if (key != "problem" && key != "rho" && key != "x0" && key != "solver")
      throw UsageError("config: unknown key '" + key + "'");

  ProblemSource src;
  const int sources = !a.builtin.empty() + !a.model.empty();
  if (sources > 1) throw UsageError("give exactly one of --builtin or --model");
  if (!a.builtin.empty()) {
    src.kind = SourceKind::Builtin;
    src.name = a.builtin;
  } else if (!a.model.empty()) {
    src.kind = SourceKind::Model;
    src.path = a.model;
  } else if (base.contains("problem")) {
    src = source_from_json(base.at("problem"));
  } else {
    throw UsageError("missing problem source: give --builtin NAME or --model FILE");
  }

  ExperimentSpec holder;
  if (a.o_rho->count())
    holder.rho = a.rho;
  else if (base.contains("rho") && !base.at("rho").is_null())
    holder.rho = base.at("rho").get<double>();
  ResolvedProblem rp = [&] {
    try {
      return resolve_problem(src, holder);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }();

  SolverConfig cfg;
  if (base.contains("solver")) cfg = solver_config_from_json(base.at("solver"));
  a.flags.apply(cfg);

  const int m = rp.problem.dimension();
  Vector x0(m);
  std::vector<double> x0_values = a.x0;
  if (x0_values.empty() && base.contains("x0") && !base.at("x0").is_null())
    x0_values = base.at("x0").get<std::vector<double>>();
  if (!x0_values.empty()) {
    if (static_cast<int>(x0_values.size()) != m)
      throw UsageError("--x0 has " + std::to_string(x0_values.size()) + " entries, problem dimension is " +
                       std::to_string(m));
    for (int i = 0; i < m; ++i) x0[i] = x0_values[i];
  } else {
    std::mt19937_64 rng(a.x0_seed);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int i = 0; i < m; ++i) x0[i] = dist(rng);
  }

  std::vector<std::string> warnings;
  try {
    warnings = validate_config(cfg, rp.problem);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  json resolved{{"problem", source_json(src)},
                {"rho", rp.problem.rho()},
                {"x0", std::vector<double>(x0.data(), x0.data() + m)},
                {"solver", to_json(cfg)}};
  std::cout << "config " << resolved.dump() << '\n';
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';

  const SolveResult r = solve(rp.problem, x0, cfg);
  if (!a.trace_out.empty()) write_trace_csv(r.trace, a.trace_out);

  double grad_norm = std::numeric_limits<double>::quiet_NaN();
  try {
    grad_norm = rp.problem.grad_phi(r.x_final).norm();
  } catch (const std::domain_error&) {
  }
  json out{{"status", to_string(r.status)},
           {"iterations", r.iterations},
           {"phi_final", r.phi_final},
           {"norm_d_final", r.norm_d_final},
           {"grad_norm", grad_norm},
           {"elapsed_ms", r.elapsed_ms}};
  if (m <= 20) out["x_final"] = std::vector<double>(r.x_final.data(), r.x_final.data() + m);
  if (!r.message.empty()) out["message"] = r.message;
  std::cout << "result " << out.dump() << '\n';

  switch (r.status) {
    case SolveStatus::StationaryPoint:
    case SolveStatus::MaxIters:
    case SolveStatus::TargetReached:
      return kOk;
    default:
      return kFailure;
  }
}

// ---------------------------------------------------------------- compare

struct CompareArgs {
  std::string spec_file, out, variant;
  std::vector<std::string> builtins, models, generated;
  int trials = 0, bdca_iters = 0, dca_cap = 0, workers = 0;
  std::uint64_t seed = 0;
  double rho = 0;
  std::vector<double> x0_box;
  CLI::Option *o_trials{}, *o_bdca_iters{}, *o_dca_cap{}, *o_workers{}, *o_seed{}, *o_rho{};
  SolverFlags flags;
};

int run_compare(const CompareArgs& a) {
  ExperimentSpec spec;
  try {
    if (!a.spec_file.empty()) spec = experiment_spec_from_json(read_json_file(a.spec_file));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (!a.builtins.empty() || !a.models.empty() || !a.generated.empty()) {
    spec.problems.clear();
    for (const auto& b : a.builtins) {
      ProblemSource s;
      s.kind = SourceKind::Builtin;
      s.name = b;
      spec.problems.push_back(s);
    }
    for (const auto& m : a.models) {
      ProblemSource s;
      s.kind = SourceKind::Model;
      s.path = m;
      spec.problems.push_back(s);
    }
    for (const auto& g : a.generated) spec.problems.push_back(parse_generate(g));
  }
  if (a.o_trials->count()) spec.trials = a.trials;
  if (a.o_bdca_iters->count()) spec.bdca_iters = a.bdca_iters;
  if (a.o_dca_cap->count()) spec.dca_cap = a.dca_cap;
  if (a.o_workers->count()) spec.workers = a.workers;
  if (a.o_seed->count()) spec.seed = a.seed;
  if (a.o_rho->count()) spec.rho = a.rho;
  if (!a.variant.empty()) spec.bdca_variant = parse_variant(a.variant);
  if (!a.x0_box.empty()) {
    if (a.x0_box.size() != 2) throw UsageError("--x0-box expects lo,hi");
    spec.x0_lo = a.x0_box[0];
    spec.x0_hi = a.x0_box[1];
  }
  a.flags.apply(spec.cfg);
  if (spec.problems.empty()) throw UsageError("no problems: give --spec, --builtin, --model or --generate");
  try {
    validate_spec(spec);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  std::cout << "config " << to_json(spec).dump() << '\n';
  const ExperimentResult res = run_experiment(spec);
  if (!a.out.empty()) write_experiment(res, spec, a.out);

  export_table(res.rows, std::cout);
  int succeeded = 0;
  for (const auto& t : res.trials) {
    if (t.failed)
      std::cerr << "trial " << t.model << '#' << t.trial << " failed: " << t.error << '\n';
    else
      ++succeeded;
  }
  for (const auto& r : res.rows)
    if (r.partial()) std::cerr << "partial row " << r.model << ": " << r.failed << " failed, "
                               << r.dca_cap_exceeded << " DCA cap exceeded\n";
  return succeeded > 0 ? kOk : kFailure;
}

// ---------------------------------------------------------------- generate / validate

int run_generate(int m, int n, std::uint64_t seed, const std::string& out) {
  std::cout << "config " << json{{"m", m}, {"n", n}, {"seed", seed}, {"out", out}}.dump() << '\n';
  try {
    save_network(generate_network(m, n, seed), out);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  } catch (const GenerationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  std::cout << "wrote " << out << '\n';
  return kOk;
}

int run_validate(const std::string& path, const std::string& l_file) {
  std::cout << "config " << json{{"model", path}, {"l_file", l_file.empty() ? json(nullptr) : json(l_file)}}.dump()
            << '\n';
  ReactionNetwork net;
  std::optional<Vector> l;
  try {
    net = load_network(path);
    if (!l_file.empty()) {
      const json lj = read_json_file(l_file);
      const auto values = lj.get<std::vector<double>>();
      l = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    }
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  ConservationCheck c;
  try {
    c = check_mass_conservation(net, l);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  const auto warnings = structural_warnings(net);
  json out{{"name", net.name}, {"m", net.m}, {"n", net.n}, {"conservation_residual", c.residual},
           {"warnings", warnings}};
  std::cout << out.dump(2) << '\n';
  if (c.residual > 0.0) {
    std::cerr << "warning: mass not conserved for the given l (residual " << c.residual << ")\n";
    return kUsage;
  }
  return kOk;
}

// ---------------------------------------------------------------- rate / audit

std::vector<double> read_csv_column(const std::string& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  std::vector<std::string> names;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) names.push_back(cell);
  }
  const auto it = std::find(names.begin(), names.end(), column);
  if (it == names.end()) throw UsageError(path + ": no column '" + column + "'");
  const std::size_t idx = static_cast<std::size_t>(it - names.begin());
  std::vector<double> values;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t i = 0;
    while (std::getline(ss, cell, ',') && i < idx) ++i;
    if (i != idx) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": missing column " + column);
    try {
      values.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
    }
  }
  return values;
}

int run_rate(const std::string& path, const std::string& column, const std::string& shift) {
  std::cout << "config " << json{{"trace", path}, {"column", column}, {"shift", shift}}.dump() << '\n';
  std::vector<double> s;
  try {
    s = read_csv_column(path, column);
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  if (shift == "final" && !s.empty()) {
    const double last = s.back();
    s.pop_back();
    for (double& v : s) v -= last;
  }
  for (double v : s)
    if (v < 0.0) throw UsageError("rate needs a nonnegative sequence; use --shift final for objective values");
  std::cout << to_json(classify_rate(s)) << '\n';
  return kOk;
}

struct AuditArgs {
  std::string path, variant = "bdca-qi";
  double sigma_g = 0, sigma_h = 0, rho = 0, alpha = 0.4, audit_tol = 1e-6;
};

int run_audit(const AuditArgs& a) {
  SolverConfig cfg;
  cfg.variant = parse_variant(a.variant);
  cfg.alpha = a.alpha;
  const ProblemModuli moduli{a.sigma_g, a.sigma_h, a.rho};
  std::cout << "config "
            << json{{"trace", a.path}, {"sigma_g", a.sigma_g}, {"sigma_h", a.sigma_h}, {"rho", a.rho},
                    {"alpha", a.alpha}, {"variant", to_string(cfg.variant)}, {"audit_tol", a.audit_tol}}
                   .dump()
            << '\n';
  Trace trace;
  try {
    trace = read_trace_csv(a.path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  const AuditReport r = audit_trace(trace, moduli, cfg, a.audit_tol);
  std::cout << to_json(r) << '\n';
  return r.passed ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boosted DC algorithm solvers and experiments"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "solve one problem");
  solve_cmd->add_option("--builtin", solve_args.builtin, "builtin problem: quartic | expsys");
  solve_cmd->add_option("--model", solve_args.model, "model JSON file");
  solve_cmd->add_option("--config", solve_args.config, "resolved config JSON (as printed by a previous run)");
  solve_args.o_rho = solve_cmd->add_option("--rho", solve_args.rho, "regularization (networks default 100)");
  auto* o_x0 = solve_cmd->add_option("--x0", solve_args.x0, "starting point, comma separated")->delimiter(',');
  solve_cmd->add_option("--x0-seed", solve_args.x0_seed, "seed for a start drawn from [-2,2]^m")->excludes(o_x0);
  solve_cmd->add_option("--trace-out", solve_args.trace_out, "write the trace CSV here");
  solve_args.flags.attach(solve_cmd, true);

  CompareArgs cmp;
  auto* compare_cmd = app.add_subcommand("compare", "matched-target BDCA vs DCA experiment");
  compare_cmd->add_option("--spec", cmp.spec_file, "experiment spec JSON");
  compare_cmd->add_option("--builtin", cmp.builtins, "builtin problem (repeatable)");
  compare_cmd->add_option("--model", cmp.models, "model file (repeatable)");
  compare_cmd->add_option("--generate", cmp.generated, "synthetic network m,n,seed (repeatable)");
  cmp.o_trials = compare_cmd->add_option("--trials", cmp.trials, "starts per problem (default 10)");
  cmp.o_bdca_iters = compare_cmd->add_option("--bdca-iters", cmp.bdca_iters, "BDCA iterations (default 1000)");
  cmp.o_dca_cap = compare_cmd->add_option("--dca-cap", cmp.dca_cap, "DCA iteration cap (default 100 x bdca-iters)");
  cmp.o_workers = compare_cmd->add_option("--workers", cmp.workers, "parallel trials (default 1)");
  cmp.o_seed = compare_cmd->add_option("--seed", cmp.seed, "seed for starting points");
  cmp.o_rho = compare_cmd->add_option("--rho", cmp.rho, "regularization for every problem");
  compare_cmd->add_option("--variant", cmp.variant, "BDCA variant (default bdca-qi)");
  compare_cmd->add_option("--x0-box", cmp.x0_box, "lo,hi of the starting box")->delimiter(',');
  compare_cmd->add_option("--out", cmp.out, "output directory (rows.csv, traces/, spec.json)");
  cmp.flags.attach(compare_cmd, false);

  int gen_m = 0, gen_n = 0;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  auto* generate_cmd = app.add_subcommand("generate", "write a synthetic conservative network");
  generate_cmd->add_option("--m", gen_m, "species")->required();
  generate_cmd->add_option("--n", gen_n, "reactions")->required();
  generate_cmd->add_option("--seed", gen_seed, "generator seed");
  generate_cmd->add_option("--out", gen_out, "output model JSON")->required();

  std::string val_model, val_l;
  auto* validate_cmd = app.add_subcommand("validate", "check a model file and its mass conservation");
  validate_cmd->add_option("model", val_model, "model JSON")->required();
  validate_cmd->add_option("--l-file", val_l, "JSON array with a positive conservation vector");

  std::string rate_trace, rate_column = "phi_x", rate_shift = "none";
  auto* rate_cmd = app.add_subcommand("rate", "classify the convergence rate of a CSV column");
  rate_cmd->add_option("trace", rate_trace, "CSV file with a header row")->required();
  rate_cmd->add_option("--column", rate_column, "column to classify (default phi_x)");
  rate_cmd->add_option("--shift", rate_shift, "none | final (subtract and drop the last value)")
      ->check(CLI::IsMember({"none", "final"}));

  AuditArgs audit_args;
  auto* audit_cmd = app.add_subcommand("audit", "re-check the descent inequalities on a trace CSV");
  audit_cmd->add_option("trace", audit_args.path, "trace CSV")->required();
  audit_cmd->add_option("--sigma-g", audit_args.sigma_g, "strong convexity of f1");
  audit_cmd->add_option("--sigma-h", audit_args.sigma_h, "strong convexity of f2");
  audit_cmd->add_option("--rho", audit_args.rho, "regularization");
  audit_cmd->add_option("--alpha", audit_args.alpha, "Armijo constant used by the run");
  audit_cmd->add_option("--variant", audit_args.variant, "variant that produced the trace");
  audit_cmd->add_option("--audit-tol", audit_args.audit_tol, "relative tolerance (default 1e-6)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*solve_cmd) return run_solve(solve_args);
    if (*compare_cmd) return run_compare(cmp);
    if (*generate_cmd) return run_generate(gen_m, gen_n, gen_seed, gen_out);
    if (*validate_cmd) return run_validate(val_model, val_l);
    if (*rate_cmd) return run_rate(rate_trace, rate_column, rate_shift);
    if (*audit_cmd) return run_audit(audit_args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
