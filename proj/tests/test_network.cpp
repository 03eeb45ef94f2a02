#include <cmath>
#include <filesystem>
#include <random>

#include <doctest.h>

#include "bdca/network.hpp"
#include "oracles.hpp"

using namespace bdca;

namespace {

ReactionNetwork single_species() {
  ReactionNetwork net;
  net.name = "tiny";
  net.m = 1;
  net.n = 1;
  net.forward = {{0, 0, 1}};
  net.reverse = {{0, 0, 2}};
  net.w = Vector::Zero(2);
  return net;
}

std::string tmp_path(const std::string& leaf) {
  std::filesystem::create_directories(BDCA_TEST_TMPDIR);
  return std::string(BDCA_TEST_TMPDIR) + "/" + leaf;
}

}  // namespace

TEST_CASE("rates on the single-species example") {
  const ReactionNetwork net = single_species();
  const Rates r = eval_rates(net, Vector::Zero(1));
  CHECK(r.e[0] == 1.0);
  CHECK(r.e[1] == 1.0);
  CHECK(r.p[0] == 3.0);
  CHECK(r.c[0] == 3.0);
  CHECK(r.f[0] == 0.0);
  const NetworkParts parts = eval_f1_f2(net, Vector::Zero(1));
  CHECK(parts.f1 == 36.0);
  CHECK(parts.f2 == 36.0);
}

TEST_CASE("shifting w scales the rates") {
  ReactionNetwork net = generate_network(5, 7, 2);
  const Vector x = Vector::Zero(5);
  const Rates base = eval_rates(net, x);
  net.w.array() += 0.3;
  const Rates shifted = eval_rates(net, x);
  const double s = std::exp(0.3);
  CHECK((shifted.p - s * base.p).norm() <= 1e-12 * shifted.p.norm());
  CHECK((shifted.c - s * base.c).norm() <= 1e-12 * shifted.c.norm());
  CHECK((shifted.f - s * base.f).norm() <= 1e-12 * (1 + shifted.p.norm()));
}

TEST_CASE("zero exponent gives row sums") {
  ReactionNetwork net = generate_network(4, 6, 9);
  net.w.setZero();
  const Rates r = eval_rates(net, Vector::Zero(4));
  Vector rows = Vector::Zero(4);
  for (const auto& e : net.forward) rows[e.species] += e.value;
  for (const auto& e : net.reverse) rows[e.species] += e.value;
  CHECK((r.p - rows).norm() == 0.0);
}

TEST_CASE("DC identity, positivity, convexity and derivatives") {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 20; ++t) {
    const ReactionNetwork net = generate_network(4 + t % 5, 6 + t % 7, 500 + t);
    const NetworkObjective obj(net);
    const Vector x = oracle::uniform_vector(net.m, -1, 1, rng);
    const Rates r = obj.eval_rates(x);
    const NetworkParts parts = obj.eval_parts(x, Order::Hessian);
    const double fsq = r.f.squaredNorm();
    CHECK(std::abs(parts.f1 - parts.f2 - fsq) <= 1e-10 * std::max(parts.f1, 1.0));
    CHECK(r.p.minCoeff() > 0.0);
    CHECK(r.c.minCoeff() > 0.0);
    for (const Matrix* H : {&parts.hess_f1, &parts.hess_f2}) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(*H);
      CHECK(es.eigenvalues().minCoeff() >= -1e-8 * H->norm());
    }
    const DerivativeCheck c = check_derivatives(make_network_problem(net, 100.0), x);
    CHECK(c.gradient_rel_error <= 1e-5);
    CHECK(c.hessian_rel_error <= 1e-4);
    CHECK(c.hessian_asymmetry <= 1e-10);
    // Jacobian of f against finite differences of f itself.
    const Matrix J = obj.jacobian_f(x);
    const Matrix J_fd = oracle::fd_jacobian([&](const Vector& z) { return obj.eval_rates(z).f; }, x);
    CHECK(oracle::rel_err(J_fd, J) <= 1e-6);
  }
}

TEST_CASE("overflow guard") {
  const ReactionNetwork net = single_species();
  CHECK_THROWS_AS(eval_rates(net, Vector::Constant(1, 701.0)), OverflowError);
  const DcProblem p = make_network_problem(net, 1.0);
  CHECK(std::isinf(p.phi(Vector::Constant(1, 701.0))));
  CHECK_FALSE(p.evaluate(Vector::Constant(1, 701.0), Order::Value).finite);
}

TEST_CASE("mass conservation checks") {
  const ConservationCheck tiny = check_mass_conservation(single_species());
  CHECK(tiny.residual == 1.0);
  CHECK(tiny.l_used == Vector::Ones(1));

  const ReactionNetwork gen = generate_network(20, 30, 7);
  CHECK(check_mass_conservation(gen).residual == 0.0);

  // Species weights l_i in {1,2,3}; entries scaled by 6 / l_i keep the
  // l-weighted column sums balanced.
  ReactionNetwork scaled = gen;
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> pick(1, 3);
  Vector l(gen.m);
  std::vector<int> factor(gen.m);
  const int lcm = 6;
  for (int i = 0; i < gen.m; ++i) {
    factor[i] = pick(rng);
    l[i] = static_cast<double>(factor[i]);
  }
  for (auto* list : {&scaled.forward, &scaled.reverse})
    for (auto& e : *list) e.value = e.value * lcm / factor[e.species];
  CHECK(check_mass_conservation(scaled, l).residual == 0.0);
  CHECK(check_mass_conservation(scaled).residual > 0.0);

  CHECK_THROWS_AS(check_mass_conservation(gen, Vector::Zero(gen.m)), std::invalid_argument);
  CHECK_THROWS_AS(check_mass_conservation(gen, Vector::Ones(3)), std::invalid_argument);
}

TEST_CASE("conservation kernel of the Jacobian") {
  const ReactionNetwork net = generate_network(15, 25, 13);
  const NetworkObjective obj(net);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    const Matrix J = obj.jacobian_f(oracle::uniform_vector(net.m, -2, 2, rng));
    CHECK((J.transpose() * Vector::Ones(net.m)).norm() <= 1e-8 * J.norm());
  }
}

TEST_CASE("generator") {
  const ReactionNetwork a = generate_network(20, 30, 7);
  const ReactionNetwork b = generate_network(20, 30, 7);
  CHECK(a == b);
  CHECK_FALSE(a == generate_network(20, 30, 8));
  CHECK(a.w.size() == 60);
  CHECK(a.w.maxCoeff() <= 1.0);
  CHECK(a.w.minCoeff() >= -1.0);
  CHECK(structural_warnings(a).empty());
  for (const auto& e : a.forward) {
    CHECK(e.value >= 1);
    CHECK(e.value <= 3);
  }
  std::vector<int> nz(a.n, 0);
  for (const auto* list : {&a.forward, &a.reverse})
    for (const auto& e : *list) ++nz[e.reaction];
  for (int j = 0; j < a.n; ++j) {
    CHECK(nz[j] >= 2);
    CHECK(nz[j] <= 4);
  }
  CHECK_THROWS(generate_network(1, 3, 0));
}

TEST_CASE("model JSON round-trip and schema errors") {
  const ReactionNetwork net = generate_network(20, 30, 7);
  const std::string path = tmp_path("net.json");
  save_network(net, path);
  CHECK(load_network(path) == net);
  CHECK(network_from_json_text(network_to_json_text(net)) == net);

  const std::string minimal = R"({"name":"tiny","m":1,"n":1,"F":[[0,0,1]],"R":[[0,0,2]],"w":[0,0]})";
  CHECK(network_from_json_text(minimal) == single_species());

  const std::string bad_w = R"({"name":"t","m":1,"n":1,"F":[[0,0,1]],"R":[[0,0,2]],"w":[0]})";
  try {
    network_from_json_text(bad_w);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("w") != std::string::npos);
  }
  const std::string negative = R"({"name":"t","m":1,"n":1,"F":[[0,0,-1]],"R":[[0,0,2]],"w":[0,0]})";
  CHECK_THROWS_AS(network_from_json_text(negative), SchemaError);
  CHECK_THROWS_AS(network_from_json_text("{\"name\": \n oops}"), SchemaError);
  const std::string empty_row = R"({"name":"t","m":2,"n":1,"F":[[0,0,1]],"R":[[0,0,1]],"w":[0,0]})";
  const ReactionNetwork loose = network_from_json_text(empty_row);
  CHECK_FALSE(structural_warnings(loose).empty());
}
