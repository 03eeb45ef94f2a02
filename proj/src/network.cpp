#include "bdca/network.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bdca {

bool operator==(const ReactionNetwork& a, const ReactionNetwork& b) {
  return a.name == b.name && a.m == b.m && a.n == b.n && a.forward == b.forward &&
         a.reverse == b.reverse && a.w.size() == b.w.size() && a.w == b.w;
}

namespace {

using Triplet = Eigen::Triplet<double>;

// Places `first` in columns [0, n) and `second` in columns [n, 2n).
SparseMatrix concat(int m, int n, const std::vector<StoichEntry>& first,
                    const std::vector<StoichEntry>& second) {
  std::vector<Triplet> t;
  t.reserve(first.size() + second.size());
  for (const StoichEntry& s : first) t.emplace_back(s.species, s.reaction, s.value);
  for (const StoichEntry& s : second) t.emplace_back(s.species, n + s.reaction, s.value);
  SparseMatrix out(m, 2 * n);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

}  // namespace

NetworkObjective::NetworkObjective(ReactionNetwork network) : network_(std::move(network)) {
  const int m = network_.m, n = network_.n;
  if (m <= 0 || n <= 0) throw std::invalid_argument("network: m and n must be positive");
  if (network_.w.size() != 2 * n) throw std::invalid_argument("network: w must have length 2n");
  auto check = [&](const std::vector<StoichEntry>& entries) {
    for (const StoichEntry& s : entries)
      if (s.species < 0 || s.species >= m || s.reaction < 0 || s.reaction >= n || s.value < 0)
        throw std::invalid_argument("network: stoichiometric entry out of range");
  };
  check(network_.forward);
  check(network_.reverse);
  M_ = concat(m, n, network_.forward, network_.reverse);
  N_ = concat(m, n, network_.reverse, network_.forward);
  B_ = M_.transpose();
  MpN_ = M_ + N_;
}

Rates NetworkObjective::eval_rates(const Vector& x) const {
  if (x.size() != network_.m) throw std::invalid_argument("eval_rates: x has wrong length");
  const Vector z = network_.w + B_ * x;
  const double zmax = z.maxCoeff();
  if (!(zmax <= kExponentCap)) {
    std::ostringstream os;
    os << "exponent " << zmax << " exceeds overflow guard " << kExponentCap;
    throw OverflowError(os.str());
  }
  Rates r;
  r.e = z.array().exp().matrix();
  r.p = M_ * r.e;
  r.c = N_ * r.e;
  r.f = r.p - r.c;
  return r;
}

NetworkParts NetworkObjective::eval_parts(const Vector& x, Order order, Part part) const {
  const Rates r = eval_rates(x);
  NetworkParts out;
  const bool want1 = part != Part::Second;
  const bool want2 = part != Part::First;
  const Vector s = r.p + r.c;
  if (want1) out.f1 = 2.0 * (r.p.squaredNorm() + r.c.squaredNorm());
  if (want2) out.f2 = s.squaredNorm();
  if (order == Order::Value) return out;

  // v1 = M^T p + N^T c and v2 = (M + N)^T s weight the curvature terms.
  Vector v1, v2;
  if (want1) {
    v1 = r.e.cwiseProduct(M_.transpose() * r.p + N_.transpose() * r.c);
    out.grad_f1 = 4.0 * (M_ * v1);
  }
  if (want2) {
    v2 = r.e.cwiseProduct(MpN_.transpose() * s);
    out.grad_f2 = 2.0 * (M_ * v2);
  }
  if (order == Order::Gradient) return out;

  if (want1) {
    const SparseMatrix jp = M_ * r.e.asDiagonal() * B_;
    const SparseMatrix jc = N_ * r.e.asDiagonal() * B_;
    const SparseMatrix curv = M_ * v1.asDiagonal() * B_;
    const SparseMatrix hess = SparseMatrix(jp.transpose()) * jp + SparseMatrix(jc.transpose()) * jc + curv;
    out.hess_f1 = 4.0 * Matrix(hess);
  }
  if (want2) {
    const SparseMatrix js = MpN_ * r.e.asDiagonal() * B_;
    const SparseMatrix curv = M_ * v2.asDiagonal() * B_;
    const SparseMatrix hess = SparseMatrix(js.transpose()) * js + curv;
    out.hess_f2 = 2.0 * Matrix(hess);
  }
  return out;
}

Matrix NetworkObjective::jacobian_f(const Vector& x) const {
  const Rates r = eval_rates(x);
  const SparseMatrix diff = M_ - N_;
  return Matrix(SparseMatrix(diff * r.e.asDiagonal() * B_));
}

Rates eval_rates(const ReactionNetwork& network, const Vector& x) {
  return NetworkObjective(network).eval_rates(x);
}

NetworkParts eval_f1_f2(const ReactionNetwork& network, const Vector& x) {
  return NetworkObjective(network).eval_parts(x, Order::Hessian);
}

DcProblem make_network_problem(std::shared_ptr<const NetworkObjective> objective, double rho) {
  const int m = objective->species();
  std::string name = objective->network().name;
  auto eval = [obj = std::move(objective)](const Vector& x, Order order, Part part) {
    DcEvaluation e;
    try {
      NetworkParts np = obj->eval_parts(x, order, part);
      e.f1 = {np.f1, std::move(np.grad_f1), std::move(np.hess_f1)};
      e.f2 = {np.f2, std::move(np.grad_f2), std::move(np.hess_f2)};
    } catch (const OverflowError&) {
      e.finite = false;
      e.f1.value = e.f2.value = std::numeric_limits<double>::infinity();
    }
    return e;
  };
  return DcProblem(m, eval, rho, 0.0, 0.0, std::move(name));
}

DcProblem make_network_problem(const ReactionNetwork& network, double rho) {
  return make_network_problem(std::make_shared<const NetworkObjective>(network), rho);
}

ConservationCheck check_mass_conservation(const ReactionNetwork& network, const std::optional<Vector>& l) {
  ConservationCheck out;
  out.l_used = l ? *l : Vector::Ones(network.m);
  if (out.l_used.size() != network.m)
    throw std::invalid_argument("conservation vector has length " + std::to_string(out.l_used.size()) +
                                ", expected " + std::to_string(network.m));
  if (!(out.l_used.array() > 0.0).all())
    throw std::invalid_argument("conservation vector must be strictly positive");
  Vector net = Vector::Zero(network.n);
  for (const StoichEntry& s : network.reverse) net[s.reaction] += s.value * out.l_used[s.species];
  for (const StoichEntry& s : network.forward) net[s.reaction] -= s.value * out.l_used[s.species];
  out.residual = network.n ? net.cwiseAbs().maxCoeff() : 0.0;
  return out;
}

std::vector<std::string> structural_warnings(const ReactionNetwork& network) {
  std::vector<std::string> warnings;
  std::vector<int> f_rows(network.m, 0), r_rows(network.m, 0);
  for (const StoichEntry& s : network.forward)
    if (s.value != 0) ++f_rows[s.species];
  for (const StoichEntry& s : network.reverse)
    if (s.value != 0) ++r_rows[s.species];
  for (int i = 0; i < network.m; ++i) {
    if (f_rows[i] == 0) warnings.push_back("species " + std::to_string(i) + " has an empty row in F");
    if (r_rows[i] == 0) warnings.push_back("species " + std::to_string(i) + " has an empty row in R");
  }
  // Net stoichiometry R - F per column.
  std::vector<std::vector<std::pair<int, int>>> cols(network.n);
  auto add = [&](const StoichEntry& s, int sign) {
    auto& col = cols[s.reaction];
    auto it = std::find_if(col.begin(), col.end(), [&](const auto& e) { return e.first == s.species; });
    if (it == col.end()) col.emplace_back(s.species, sign * s.value);
    else it->second += sign * s.value;
  };
  for (const StoichEntry& s : network.reverse) add(s, 1);
  for (const StoichEntry& s : network.forward) add(s, -1);
  for (int j = 0; j < network.n; ++j) {
    const auto nnz = std::count_if(cols[j].begin(), cols[j].end(), [](const auto& e) { return e.second != 0; });
    if (nnz < 2)
      warnings.push_back("reaction " + std::to_string(j) + " has " + std::to_string(nnz) +
                         " nonzero net stoichiometric coefficients (expected at least 2)");
  }
  return warnings;
}

}  // namespace bdca
