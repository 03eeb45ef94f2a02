#include "bdca/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

namespace bdca {

bool verify_rate_inequality(std::span<const double> s, double alpha, double beta, std::size_t from_index) {
  for (std::size_t k = from_index; k + 1 < s.size(); ++k) {
    if (s[k + 1] > s[k]) return false;
    if (s[k] == 0.0) continue;
    const double lhs = alpha == 0.0 ? 1.0 : std::pow(s[k], alpha);
    if (lhs > beta * (s[k] - s[k + 1]) + 1e-12) return false;
  }
  return true;
}

std::string to_string(RateRegime r) {
  switch (r) {
    case RateRegime::Finite: return "Finite";
    case RateRegime::Linear: return "Linear";
    case RateRegime::Sublinear: return "Sublinear";
    case RateRegime::Inconclusive: return "Inconclusive";
  }
  return "?";
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

RateReport classify_rate(std::span<const double> s, const RateConfig& cfg) {
  RateReport report;
  report.samples_used = static_cast<int>(s.size());
  if (s.size() < cfg.min_length) return report;
  for (double v : s)
    if (!std::isfinite(v) || v < 0.0) return report;

  const double atol = cfg.finite_rel_tol * s[0];
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] <= atol) {
      report.regime = RateRegime::Finite;
      report.samples_used = static_cast<int>(k + 1);
      return report;
    }
  }

  const std::size_t window = std::max<std::size_t>(
      5, static_cast<std::size_t>(std::lround(cfg.window_fraction * static_cast<double>(s.size()))));
  const std::size_t start = s.size() - std::min(window, s.size());
  report.samples_used = static_cast<int>(s.size() - start);

  std::vector<double> ratios, log_ratios;
  for (std::size_t k = start; k + 1 < s.size(); ++k) {
    ratios.push_back(s[k + 1] / s[k]);
    log_ratios.push_back(std::log(ratios.back()));
  }
  const bool contracting = std::all_of(ratios.begin(), ratios.end(), [](double r) { return r > 0.0 && r < 1.0; });
  const bool nonincreasing = std::all_of(ratios.begin(), ratios.end(), [](double r) { return r <= 1.0; });

  if (contracting) {
    const double mr = mean(ratios);
    double var = 0.0;
    for (double r : ratios) var += (r - mr) * (r - mr);
    var /= static_cast<double>(ratios.size());

    const std::size_t half = ratios.size() / 2;
    std::vector<double> gaps(ratios.size());
    std::transform(ratios.begin(), ratios.end(), gaps.begin(), [](double r) { return 1.0 - r; });
    const double g_first = mean(std::span<const double>(gaps).first(half));
    const double g_second = mean(std::span<const double>(gaps).subspan(half));
    const double drift = std::abs(g_first - g_second) / mean(gaps);

    if (var < cfg.ratio_variance_max && drift <= cfg.gap_drift_max) {
      std::vector<double> ks, logs;
      for (std::size_t k = start; k < s.size(); ++k) {
        ks.push_back(static_cast<double>(k));
        logs.push_back(std::log(s[k]));
      }
      report.regime = RateRegime::Linear;
      report.rate = std::exp(mean(log_ratios));
      report.fit_residual = fit_line(ks, logs).rms;
      return report;
    }
  }

  if (nonincreasing) {
    std::vector<double> logk, logs;
    for (std::size_t k = start; k < s.size(); ++k) {
      logk.push_back(std::log(static_cast<double>(k + 1)));
      logs.push_back(std::log(s[k]));
    }
    const LineFit fit = fit_line(logk, logs);
    if (fit.slope < 0.0) {
      report.regime = RateRegime::Sublinear;
      report.exponent = -fit.slope;
      report.fit_residual = fit.rms;
      return report;
    }
  }
  return report;
}

AuditReport audit_trace(const Trace& trace, const ProblemModuli& moduli, const SolverConfig& cfg,
                        double audit_tol) {
  AuditReport report;
  report.audit_tol = audit_tol;
  const double c_dec = moduli.decrease();
  const double c_desc = moduli.descent();
  const bool fm = cfg.variant == Variant::FukushimaMine;
  if (trace.empty()) return report;

  auto flag = [&](int k, const char* id, double lhs, double rhs) {
    if (!(lhs <= rhs)) report.violations.push_back({k, id, lhs, rhs});
  };

  // An increase of phi(x_k) also breaks the combined decrease and prefix sum
  // ending at k; those are reported once, as "monotone".
  std::vector<char> rises(trace.size(), 0);
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const double prev_tol = audit_tol * (1.0 + std::abs(trace[i - 1].phi_x));
    rises[i] = !(trace[i].phi_x <= trace[i - 1].phi_x + prev_tol);
  }

  const double phi0 = trace.front().phi_x;
  double sum_decrease = 0.0;
  double sum_tol = 0.0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const TraceRecord& r = trace[i];
    const double tol = audit_tol * (1.0 + std::abs(r.phi_x));
    const double dd = r.norm_d * r.norm_d;
    ++report.iterations_checked;

    flag(r.k, "decrease", r.phi_y, r.phi_x - c_dec * dd + tol);

    if (std::isfinite(r.slope) && r.norm_d > 0.0) {
      report.slope_checked = true;
      flag(r.k, "descent_slope", r.slope, -c_desc * dd + audit_tol * (1.0 + dd));
    }

    if (rises[i]) {
      const double prev_tol = audit_tol * (1.0 + std::abs(trace[i - 1].phi_x));
      flag(r.k, "monotone", r.phi_x, trace[i - 1].phi_x + prev_tol);
    }

    double next = r.phi_next;
    int attributed = r.k;
    bool subsumed = false;
    if (!std::isfinite(next)) {
      if (i + 1 >= trace.size()) continue;
      next = trace[i + 1].phi_x;
      attributed = trace[i + 1].k;
      subsumed = rises[i + 1];
    }
    const double coeff = fm ? cfg.alpha * (1.0 + r.lambda) : cfg.alpha * r.lambda + c_dec;
    sum_decrease += coeff * dd;
    sum_tol += tol;
    if (subsumed) continue;
    flag(attributed, "combined_decrease", next, r.phi_x - coeff * dd + tol);
    flag(attributed, "summability", sum_decrease, phi0 - next + sum_tol);
  }
  report.passed = report.violations.empty();
  return report;
}

std::string to_json(const RateReport& report) {
  nlohmann::json j;
  j["regime"] = to_string(report.regime);
  j["rate"] = report.rate ? nlohmann::json(*report.rate) : nlohmann::json(nullptr);
  j["exponent"] = report.exponent ? nlohmann::json(*report.exponent) : nlohmann::json(nullptr);
  j["fit_residual"] = report.fit_residual;
  j["samples_used"] = report.samples_used;
  return j.dump(2);
}

std::string to_json(const AuditReport& report) {
  nlohmann::json j;
  j["passed"] = report.passed;
  j["audit_tol"] = report.audit_tol;
  j["iterations_checked"] = report.iterations_checked;
  j["slope_checked"] = report.slope_checked;
  j["violations"] = nlohmann::json::array();
  for (const Violation& v : report.violations)
    j["violations"].push_back({{"iteration", v.iteration}, {"id", v.id}, {"lhs", v.lhs}, {"rhs", v.rhs}});
  return j.dump(2);
}

}  // namespace bdca
