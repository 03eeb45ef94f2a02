#include <cmath>
#include <sstream>
#include <vector>

#include <doctest.h>

#include "bdca/analysis.hpp"

using namespace bdca;

namespace {

std::vector<double> geometric(double r, int n, double s0 = 1.0) {
  std::vector<double> s(n);
  for (int k = 0; k < n; ++k) s[k] = s0 * std::pow(r, k);
  return s;
}

std::vector<double> power(double p, int n) {
  std::vector<double> s(n);
  for (int k = 0; k < n; ++k) s[k] = std::pow(k + 1.0, -p);
  return s;
}

Vector scalar(double v) { return Vector::Constant(1, v); }

}  // namespace

TEST_CASE("verify_rate_inequality regimes") {
  const auto g = geometric(0.5, 40);
  CHECK(verify_rate_inequality(g, 1.0, 2.0));
  CHECK_FALSE(verify_rate_inequality(g, 1.0, 1.9));
  const std::vector<double> finite{3, 2, 1, 0, 0, 0};
  CHECK(verify_rate_inequality(finite, 0.0, 1.0));
  // Affine drops of 0.5 are too small for alpha = 0 with beta = 1.
  const std::vector<double> slow{2, 1.5, 1, 0.5, 0};
  CHECK_FALSE(verify_rate_inequality(slow, 0.0, 1.0));
  CHECK(verify_rate_inequality(slow, 0.0, 2.0));
  // Sublinear: s_k = 1/(k+1) satisfies s^2 <= beta (s_k - s_{k+1}) with beta >= 2.
  const auto h = power(1.0, 200);
  CHECK(verify_rate_inequality(h, 2.0, 2.0));
  CHECK_FALSE(verify_rate_inequality(h, 2.0, 0.9));
  // Increasing tail is rejected.
  const std::vector<double> up{1, 0.5, 0.6};
  CHECK_FALSE(verify_rate_inequality(up, 1.0, 100.0));
  CHECK(verify_rate_inequality(up, 1.0, 100.0, 2));
}

TEST_CASE("verify_rate_inequality is monotone in beta") {
  const std::vector<std::vector<double>> seqs{geometric(0.7, 30), power(1.5, 50), {3, 2, 1, 0}};
  for (const auto& s : seqs)
    for (double alpha : {0.0, 0.5, 1.0, 1.5, 2.0})
      for (double b = 0.1; b < 20.0; b *= 1.3)
        if (verify_rate_inequality(s, alpha, b)) {
          CHECK(verify_rate_inequality(s, alpha, b * 1.01));
          CHECK(verify_rate_inequality(s, alpha, b * 7.0));
        }
}

TEST_CASE("classify_rate") {
  std::vector<double> fin = geometric(0.5, 20);
  for (int k = 5; k < 20; ++k) fin[k] = 0.0;
  CHECK(classify_rate(fin).regime == RateRegime::Finite);

  const RateReport lin = classify_rate(geometric(0.9, 200));
  CHECK(lin.regime == RateRegime::Linear);
  REQUIRE(lin.rate.has_value());
  CHECK(*lin.rate >= 0.88);
  CHECK(*lin.rate <= 0.92);

  const RateReport sub = classify_rate(power(2.0, 1000));
  CHECK(sub.regime == RateRegime::Sublinear);
  REQUIRE(sub.exponent.has_value());
  CHECK(*sub.exponent >= 1.8);
  CHECK(*sub.exponent <= 2.2);

  CHECK(classify_rate(geometric(0.5, 5)).regime == RateRegime::Inconclusive);
}

TEST_CASE("classify_rate is scale invariant") {
  const auto base = geometric(0.8, 100);
  const RateReport r0 = classify_rate(base);
  for (double c : {1e-6, 3.0, 1e8}) {
    std::vector<double> s(base);
    for (double& v : s) v *= c;
    const RateReport r = classify_rate(s);
    CHECK(r.regime == r0.regime);
    CHECK(std::abs(*r.rate - *r0.rate) <= 1e-9);
  }
  const auto pw = power(1.5, 500);
  std::vector<double> spw(pw);
  for (double& v : spw) v *= 42.0;
  CHECK(classify_rate(spw).regime == classify_rate(pw).regime);
}

TEST_CASE("quartic DCA error sequence is linear at about 1/3") {
  SolverConfig cfg;
  cfg.variant = Variant::DCA;
  cfg.record_iterates = true;
  const SolveResult r = solve(make_quartic_problem(), scalar(27.0 / 125.0), cfg);
  std::vector<double> err;
  for (const auto& x : r.iterates) err.push_back(std::abs(x[0] - 1.0));
  const RateReport rep = classify_rate(err);
  CHECK(rep.regime == RateRegime::Linear);
  CHECK(*rep.rate >= 0.28);
  CHECK(*rep.rate <= 0.38);
}

TEST_CASE("audits of solver traces pass") {
  const DcProblem q = make_quartic_problem();
  for (Variant v : {Variant::DCA, Variant::BdcaBacktracking, Variant::BdcaQuadratic, Variant::FukushimaMine}) {
    SolverConfig cfg;
    cfg.variant = v;
    const SolveResult r = solve(q, scalar(27.0 / 125.0), cfg);
    const AuditReport a = audit_trace(r.trace, ProblemModuli::of(q), cfg);
    CHECK(a.passed);
    CHECK(a.violations.empty());
    CHECK(a.slope_checked);
    if (v == Variant::DCA)
      for (const auto& rec : r.trace) CHECK(rec.lambda == 0.0);
  }
}

TEST_CASE("corrupted trace yields exactly one violation") {
  const DcProblem q = make_quartic_problem();
  SolverConfig cfg;
  cfg.variant = Variant::DCA;
  const SolveResult r = solve(q, scalar(27.0 / 125.0), cfg);
  REQUIRE(r.trace.size() > 5);
  // CSV view: no slope / phi_next columns.
  std::stringstream ss;
  write_trace_csv(r.trace, ss);
  Trace t = read_trace_csv(ss);
  CHECK(audit_trace(t, ProblemModuli::of(q), cfg).passed);
  t[3].phi_x = t[2].phi_x + 0.01;
  const AuditReport a = audit_trace(t, ProblemModuli::of(q), cfg);
  CHECK_FALSE(a.passed);
  REQUIRE(a.violations.size() == 1);
  CHECK(a.violations[0].iteration == 3);
  CHECK(a.violations[0].id == "monotone");
}

TEST_CASE("report JSON") {
  const std::string j = to_json(classify_rate(geometric(0.9, 100)));
  CHECK(j.find("Linear") != std::string::npos);
  AuditReport a;
  a.violations.push_back({3, "monotone", 1.0, 0.5});
  a.passed = false;
  CHECK(to_json(a).find("monotone") != std::string::npos);
}
