#include "bdca/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace bdca {

using nlohmann::json;
namespace fs = std::filesystem;

void validate_spec(const ExperimentSpec& spec) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(!spec.problems.empty(), "experiment needs at least one problem");
  require(spec.trials >= 1, "trials must be >= 1");
  require(spec.x0_lo < spec.x0_hi, "x0 box must satisfy lo < hi");
  require(spec.bdca_iters >= 0, "bdca_iters must be nonnegative");
  require(spec.resolved_dca_cap() >= 0, "dca_cap must be nonnegative");
  require(spec.workers >= 1, "workers must be >= 1");
  require(!spec.rho || *spec.rho >= 0.0, "rho must be nonnegative");
  require(spec.bdca_variant != Variant::DCA, "bdca_variant must be a boosted variant");
  for (const ProblemSource& p : spec.problems) {
    if (p.kind == SourceKind::Generated) require(p.m >= 2 && 2 * p.n >= p.m, "generator needs m >= 2, n >= m/2");
    if (p.kind == SourceKind::Model) require(!p.path.empty(), "model source needs a path");
  }
  // Parameter checks that do not depend on the problem.
  const DcProblem probe = make_quartic_problem().with_rho(1.0);
  SolverConfig cfg = spec.cfg;
  cfg.variant = spec.bdca_variant;
  validate_config(cfg, probe);
}

MatchedRun run_matched_target(const DcProblem& problem, const Vector& x0, const ExperimentSpec& spec) {
  MatchedRun run;
  SolverConfig bcfg = spec.cfg;
  bcfg.variant = spec.bdca_variant;
  bcfg.max_outer_iters = spec.bdca_iters;
  bcfg.phi_target.reset();
  run.bdca = solve(problem, x0, bcfg);

  SolverConfig dcfg = spec.cfg;
  dcfg.variant = Variant::DCA;
  dcfg.max_outer_iters = spec.resolved_dca_cap();
  dcfg.phi_target = run.bdca.phi_final;
  run.dca = solve(problem, x0, dcfg);
  run.dca_cap_exceeded = run.dca.status != SolveStatus::TargetReached;
  return run;
}

double TrialResult::iteration_ratio() const {
  const double b = run.bdca.iterations;
  return b > 0 ? run.dca.iterations / b : std::numeric_limits<double>::quiet_NaN();
}

ResolvedProblem resolve_problem(const ProblemSource& source, const ExperimentSpec& spec) {
  switch (source.kind) {
    case SourceKind::Builtin: {
      DcProblem p = make_builtin_problem(source.name);
      if (spec.rho) p = p.with_rho(*spec.rho);
      return {p, source.name, p.dimension(), 0};
    }
    case SourceKind::Model: {
      ReactionNetwork net = load_network(source.path);
      if (net.name.empty()) net.name = fs::path(source.path).stem().string();
      return {make_network_problem(net, spec.rho.value_or(kDefaultNetworkRho)), net.name, net.m, net.n};
    }
    case SourceKind::Generated: {
      ReactionNetwork net = generate_network(source.m, source.n, source.seed);
      return {make_network_problem(net, spec.rho.value_or(kDefaultNetworkRho)), net.name, net.m, net.n};
    }
  }
  throw std::logic_error("unreachable problem source");
}

Vector trial_start(const ExperimentSpec& spec, int problem_index, int trial, int dimension) {
  if (spec.x0) {
    if (static_cast<int>(spec.x0->size()) != dimension)
      throw std::invalid_argument("fixed x0 has length " + std::to_string(spec.x0->size()) + ", expected " +
                                  std::to_string(dimension));
    return Eigen::Map<const Vector>(spec.x0->data(), dimension);
  }
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                    static_cast<std::uint32_t>(problem_index), static_cast<std::uint32_t>(trial)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> dist(spec.x0_lo, spec.x0_hi);
  Vector x(dimension);
  for (int i = 0; i < dimension; ++i) x[i] = dist(rng);
  return x;
}

namespace {

Stats stats_of(const std::vector<double>& v) {
  if (v.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan};
  }
  Stats s;
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  s.avg = sum / static_cast<double>(v.size());
  return s;
}

bool is_failure(SolveStatus s) {
  return s == SolveStatus::LineSearchFailure || s == SolveStatus::NumericalFailure;
}

std::string safe_name(std::string s) {
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  return s;
}

}  // namespace

ComparisonRow aggregate(const std::string& model, int m, int n, const std::vector<TrialResult>& trials) {
  ComparisonRow row;
  row.model = model;
  row.m = m;
  row.n = n;
  row.trials = static_cast<int>(trials.size());
  std::vector<double> phi0, phi_end, phi_end_dca, bt, bi, di, dt;
  for (const TrialResult& t : trials) {
    if (t.failed) {
      ++row.failed;
      continue;
    }
    if (t.run.dca_cap_exceeded) ++row.dca_cap_exceeded;
    phi0.push_back(t.phi_x0);
    phi_end.push_back(t.run.bdca.phi_final);
    phi_end_dca.push_back(t.run.dca.phi_final);
    bt.push_back(t.run.bdca.elapsed_ms / 1000.0);
    bi.push_back(t.run.bdca.iterations);
    di.push_back(t.run.dca.iterations);
    dt.push_back(t.run.dca.elapsed_ms / 1000.0);
  }
  row.avg_phi_x0 = stats_of(phi0).avg;
  row.avg_phi_end = stats_of(phi_end).avg;
  row.avg_phi_end_dca = stats_of(phi_end_dca).avg;
  row.bdca_time = stats_of(bt);
  row.bdca_iters = stats_of(bi);
  row.dca_iters = stats_of(di);
  row.dca_time = stats_of(dt);
  row.ratio_iters = row.dca_iters.avg / row.bdca_iters.avg;
  row.ratio_time = row.dca_time.avg / row.bdca_time.avg;
  return row;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  validate_spec(spec);
  std::vector<ResolvedProblem> problems;
  for (const ProblemSource& src : spec.problems) problems.push_back(resolve_problem(src, spec));
  for (const ResolvedProblem& p : problems) {
    SolverConfig cfg = spec.cfg;
    cfg.variant = spec.bdca_variant;
    validate_config(cfg, p.problem);
  }

  ExperimentResult result;
  const int total = static_cast<int>(problems.size()) * spec.trials;
  result.trials.resize(total);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int job = next++; job < total; job = next++) {
      const int pi = job / spec.trials;
      const int trial = job % spec.trials;
      const ResolvedProblem& rp = problems[pi];
      TrialResult& t = result.trials[job];
      t.model = rp.name;
      t.problem_index = pi;
      t.trial = trial;
      try {
        t.x0 = trial_start(spec, pi, trial, rp.m);
        t.phi_x0 = rp.problem.phi(t.x0);
        t.run = run_matched_target(rp.problem, t.x0, spec);
        if (is_failure(t.run.bdca.status) || is_failure(t.run.dca.status)) {
          t.failed = true;
          t.error = is_failure(t.run.bdca.status) ? "bdca: " + t.run.bdca.message : "dca: " + t.run.dca.message;
        }
      } catch (const std::exception& e) {
        t.failed = true;
        t.error = e.what();
      }
    }
  };
  const int nthreads = std::min(spec.workers, total);
  std::vector<std::thread> pool;
  for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();

  for (std::size_t pi = 0; pi < problems.size(); ++pi) {
    std::vector<TrialResult> mine(result.trials.begin() + static_cast<long>(pi) * spec.trials,
                                  result.trials.begin() + static_cast<long>(pi + 1) * spec.trials);
    result.rows.push_back(aggregate(problems[pi].name, problems[pi].m, problems[pi].n, mine));
  }
  return result;
}

void export_table(const std::vector<ComparisonRow>& rows, std::ostream& out) {
  if (rows.empty()) throw std::invalid_argument("export_table: no rows");
  const auto old_precision = out.precision(17);
  out << kTableHeader << '\n';
  for (const ComparisonRow& r : rows) {
    out << safe_name(r.model) << ',' << r.m << ',' << r.n << ',' << r.trials << ',' << r.failed << ','
        << r.dca_cap_exceeded << ',' << r.avg_phi_x0 << ',' << r.avg_phi_end << ',' << r.avg_phi_end_dca;
    for (const Stats* s : {&r.bdca_time, &r.bdca_iters, &r.dca_iters, &r.dca_time})
      out << ',' << s->min << ',' << s->max << ',' << s->avg;
    out << ',' << r.ratio_iters << ',' << r.ratio_time << '\n';
  }
  out.precision(old_precision);
}

void export_table(const std::vector<ComparisonRow>& rows, const std::string& path) {
  if (rows.empty()) throw std::invalid_argument("export_table: no rows");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open table for writing: " + path);
  export_table(rows, out);
  if (!out) throw std::runtime_error("failed writing table: " + path);
}

std::vector<ComparisonRow> read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open table: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kTableHeader)
    throw std::runtime_error(path + " line 1: unexpected header");
  std::vector<ComparisonRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> c;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) c.push_back(cell);
    if (c.size() != 23)
      throw std::runtime_error(path + " line " + std::to_string(lineno) + ": expected 23 fields");
    try {
      ComparisonRow r;
      r.model = c[0];
      r.m = std::stoi(c[1]);
      r.n = std::stoi(c[2]);
      r.trials = std::stoi(c[3]);
      r.failed = std::stoi(c[4]);
      r.dca_cap_exceeded = std::stoi(c[5]);
      r.avg_phi_x0 = std::stod(c[6]);
      r.avg_phi_end = std::stod(c[7]);
      r.avg_phi_end_dca = std::stod(c[8]);
      std::size_t i = 9;
      for (Stats* s : {&r.bdca_time, &r.bdca_iters, &r.dca_iters, &r.dca_time}) {
        s->min = std::stod(c[i++]);
        s->max = std::stod(c[i++]);
        s->avg = std::stod(c[i++]);
      }
      r.ratio_iters = std::stod(c[21]);
      r.ratio_time = std::stod(c[22]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw std::runtime_error(path + " line " + std::to_string(lineno) + ": malformed number");
    }
  }
  return rows;
}

void export_traces(const ExperimentResult& result, const std::string& dir) {
  const fs::path traces = fs::path(dir);
  fs::create_directories(traces);
  for (const TrialResult& t : result.trials) {
    const std::string stem = safe_name(t.model) + "_" + std::to_string(t.trial);
    write_trace_csv(t.run.bdca.trace, (traces / (stem + "_bdca.csv")).string());
    write_trace_csv(t.run.dca.trace, (traces / (stem + "_dca.csv")).string());
  }
}

void write_experiment(const ExperimentResult& result, const ExperimentSpec& spec, const std::string& dir) {
  fs::create_directories(dir);
  export_table(result.rows, (fs::path(dir) / "rows.csv").string());
  export_traces(result, (fs::path(dir) / "traces").string());
  std::ofstream out(fs::path(dir) / "spec.json");
  if (!out) throw std::runtime_error("cannot write " + (fs::path(dir) / "spec.json").string());
  out << to_json(spec).dump(2) << '\n';
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw std::invalid_argument(where + ": unknown key '" + key + "'");
}

std::optional<double> read_optional(const json& j, const char* key, std::optional<double> fallback) {
  if (!j.contains(key)) return fallback;
  if (j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

std::string kind_name(SourceKind k) {
  switch (k) {
    case SourceKind::Builtin: return "builtin";
    case SourceKind::Model: return "model";
    case SourceKind::Generated: return "generated";
  }
  return "?";
}

}  // namespace

json to_json(const SolverConfig& cfg) {
  return {
      {"variant", to_string(cfg.variant)},
      {"alpha", cfg.alpha},
      {"beta", cfg.beta},
      {"lambda_bar", cfg.lambda_bar},
      {"lambda_max", cfg.lambda_max},
      {"max_outer_iters", cfg.max_outer_iters},
      {"max_backtracks", cfg.max_backtracks},
      {"tol_d", optional_number(cfg.tol_d)},
      {"tol_x", optional_number(cfg.tol_x)},
      {"inner", {{"tol_grad", cfg.inner.tol_grad}, {"tol_step", cfg.inner.tol_step}, {"max_iters", cfg.inner.max_iters},
                 {"damping_floor", cfg.inner.damping_floor}}},
      {"proximal_c", optional_number(cfg.proximal_c)},
      {"phi_target", optional_number(cfg.phi_target)},
  };
}

SolverConfig solver_config_from_json(const json& j, SolverConfig cfg) {
  reject_unknown(j, {"variant", "alpha", "beta", "lambda_bar", "lambda_max", "max_outer_iters", "max_backtracks",
                     "tol_d", "tol_x", "inner", "proximal_c", "phi_target"},
                 "solver config");
  try {
    if (j.contains("variant")) cfg.variant = parse_variant(j.at("variant").get<std::string>());
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.beta = j.value("beta", cfg.beta);
    cfg.lambda_bar = j.value("lambda_bar", cfg.lambda_bar);
    cfg.lambda_max = j.value("lambda_max", cfg.lambda_max);
    cfg.max_outer_iters = j.value("max_outer_iters", cfg.max_outer_iters);
    cfg.max_backtracks = j.value("max_backtracks", cfg.max_backtracks);
    cfg.tol_d = read_optional(j, "tol_d", cfg.tol_d);
    cfg.tol_x = read_optional(j, "tol_x", cfg.tol_x);
    cfg.proximal_c = read_optional(j, "proximal_c", cfg.proximal_c);
    cfg.phi_target = read_optional(j, "phi_target", cfg.phi_target);
    if (j.contains("inner")) {
      const json& in = j.at("inner");
      reject_unknown(in, {"tol_grad", "tol_step", "max_iters", "damping_floor"}, "solver config inner");
      cfg.inner.tol_grad = in.value("tol_grad", cfg.inner.tol_grad);
      cfg.inner.tol_step = in.value("tol_step", cfg.inner.tol_step);
      cfg.inner.max_iters = in.value("max_iters", cfg.inner.max_iters);
      cfg.inner.damping_floor = in.value("damping_floor", cfg.inner.damping_floor);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("solver config: ") + e.what());
  }
  return cfg;
}

json to_json(const ExperimentSpec& spec) {
  json problems = json::array();
  for (const ProblemSource& p : spec.problems) {
    json e{{"kind", kind_name(p.kind)}};
    if (p.kind == SourceKind::Builtin) e["name"] = p.name;
    if (p.kind == SourceKind::Model) e["path"] = p.path;
    if (p.kind == SourceKind::Generated) {
      e["m"] = p.m;
      e["n"] = p.n;
      e["seed"] = p.seed;
    }
    problems.push_back(e);
  }
  json j{
      {"problems", problems},
      {"trials", spec.trials},
      {"x0_box", {spec.x0_lo, spec.x0_hi}},
      {"x0", spec.x0 ? json(*spec.x0) : json(nullptr)},
      {"bdca_iters", spec.bdca_iters},
      {"dca_cap", spec.resolved_dca_cap()},
      {"bdca_variant", to_string(spec.bdca_variant)},
      {"solver", to_json(spec.cfg)},
      {"rho", optional_number(spec.rho)},
      {"seed", spec.seed},
      {"workers", spec.workers},
  };
  return j;
}

ExperimentSpec experiment_spec_from_json(const json& j) {
  reject_unknown(j, {"problems", "trials", "x0_box", "x0", "bdca_iters", "dca_cap", "bdca_variant", "solver", "rho",
                     "seed", "workers"},
                 "experiment spec");
  ExperimentSpec spec;
  try {
    if (j.contains("problems")) {
      for (const json& p : j.at("problems")) {
        reject_unknown(p, {"kind", "name", "path", "m", "n", "seed"}, "problem source");
        ProblemSource src;
        const std::string kind = p.at("kind").get<std::string>();
        if (kind == "builtin") {
          src.kind = SourceKind::Builtin;
          src.name = p.at("name").get<std::string>();
        } else if (kind == "model") {
          src.kind = SourceKind::Model;
          src.path = p.at("path").get<std::string>();
        } else if (kind == "generated") {
          src.kind = SourceKind::Generated;
          src.m = p.at("m").get<int>();
          src.n = p.at("n").get<int>();
          src.seed = p.value("seed", std::uint64_t{0});
        } else {
          throw std::invalid_argument("problem source: unknown kind '" + kind + "'");
        }
        spec.problems.push_back(src);
      }
    }
    spec.trials = j.value("trials", spec.trials);
    if (j.contains("x0_box")) {
      const json& box = j.at("x0_box");
      if (!box.is_array() || box.size() != 2) throw std::invalid_argument("x0_box: expected [lo, hi]");
      spec.x0_lo = box[0].get<double>();
      spec.x0_hi = box[1].get<double>();
    }
    if (j.contains("x0") && !j.at("x0").is_null()) spec.x0 = j.at("x0").get<std::vector<double>>();
    spec.bdca_iters = j.value("bdca_iters", spec.bdca_iters);
    if (j.contains("dca_cap") && !j.at("dca_cap").is_null()) spec.dca_cap = j.at("dca_cap").get<int>();
    if (j.contains("bdca_variant")) spec.bdca_variant = parse_variant(j.at("bdca_variant").get<std::string>());
    if (j.contains("solver")) spec.cfg = solver_config_from_json(j.at("solver"));
    spec.rho = read_optional(j, "rho", spec.rho);
    spec.seed = j.value("seed", spec.seed);
    spec.workers = j.value("workers", spec.workers);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("experiment spec: ") + e.what());
  }
  return spec;
}

}  // namespace bdca
