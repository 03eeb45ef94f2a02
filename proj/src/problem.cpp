#include "bdca/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace bdca {

DcProblem::DcProblem(int dimension, DcEvaluator evaluator, double rho, double sigma_g,
                     double sigma_h, std::string name)
    : dimension_(dimension),
      evaluator_(std::move(evaluator)),
      rho_(rho),
      sigma_g_(sigma_g),
      sigma_h_(sigma_h),
      name_(std::move(name)) {
  if (dimension_ <= 0) throw std::invalid_argument("DcProblem: dimension must be positive");
  if (!evaluator_) throw std::invalid_argument("DcProblem: evaluator is empty");
  if (!(rho_ >= 0.0)) throw std::invalid_argument("DcProblem: rho must be nonnegative");
  if (!(sigma_g_ >= 0.0) || !(sigma_h_ >= 0.0))
    throw std::invalid_argument("DcProblem: strong convexity moduli must be nonnegative");
}

DcProblem DcProblem::with_rho(double rho) const {
  return DcProblem(dimension_, evaluator_, rho, sigma_g_, sigma_h_, name_);
}

DcEvaluation DcProblem::evaluate(const Vector& x, Order order, Part part) const {
  if (x.size() != dimension_) throw std::invalid_argument("DcProblem: dimension mismatch");
  DcEvaluation e = evaluator_(x, order, part);
  if (e.finite) {
    auto check = [&](const PartEvaluation& p) {
      if (!std::isfinite(p.value)) e.finite = false;
      if (p.gradient.size() && !p.gradient.allFinite()) e.finite = false;
      if (p.hessian.size() && !p.hessian.allFinite()) e.finite = false;
    };
    if (part != Part::Second) check(e.f1);
    if (part != Part::First) check(e.f2);
  }
  return e;
}

double DcProblem::phi(const Vector& x) const {
  const DcEvaluation e = evaluate(x, Order::Value);
  if (!e.finite) return std::numeric_limits<double>::infinity();
  const double v = e.f1.value - e.f2.value;
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

Vector DcProblem::grad_phi(const Vector& x) const {
  const DcEvaluation e = evaluate(x, Order::Gradient);
  if (!e.finite) throw std::domain_error("grad_phi: non-finite evaluation");
  return e.f1.gradient - e.f2.gradient;
}

namespace {

PartEvaluation regularize(PartEvaluation p, const Vector& x, double rho, Order order) {
  if (rho == 0.0) return p;
  p.value += 0.5 * rho * x.squaredNorm();
  if (order != Order::Value) p.gradient += rho * x;
  if (order == Order::Hessian) p.hessian.diagonal().array() += rho;
  return p;
}

}  // namespace

PartEvaluation DcProblem::eval_g(const Vector& x, Order order) const {
  DcEvaluation e = evaluate(x, order, Part::First);
  if (!e.finite) {
    PartEvaluation bad;
    bad.value = std::numeric_limits<double>::infinity();
    return bad;
  }
  return regularize(std::move(e.f1), x, rho_, order);
}

PartEvaluation DcProblem::eval_h(const Vector& x, Order order) const {
  DcEvaluation e = evaluate(x, order, Part::Second);
  if (!e.finite) {
    PartEvaluation bad;
    bad.value = std::numeric_limits<double>::infinity();
    return bad;
  }
  return regularize(std::move(e.f2), x, rho_, order);
}

DcProblem make_quartic_problem() {
  auto eval = [](const Vector& x, Order order, Part part) {
    DcEvaluation e;
    const double t = x[0];
    if (part != Part::Second) {
      e.f1.value = 0.25 * t * t * t * t;
      if (order != Order::Value) e.f1.gradient = Vector::Constant(1, t * t * t);
      if (order == Order::Hessian) e.f1.hessian = Matrix::Constant(1, 1, 3.0 * t * t);
    }
    if (part != Part::First) {
      e.f2.value = 0.5 * t * t;
      if (order != Order::Value) e.f2.gradient = Vector::Constant(1, t);
      if (order == Order::Hessian) e.f2.hessian = Matrix::Identity(1, 1);
    }
    return e;
  };
  return DcProblem(1, eval, 0.0, 0.0, 1.0, "quartic");
}

DcProblem make_system_problem(SystemMap p, SystemMap c, int dimension, double rho,
                              std::string name) {
  auto eval = [p = std::move(p), c = std::move(c), dimension](const Vector& x, Order order,
                                                              Part part) {
    const SystemEvaluation pe = p(x);
    const SystemEvaluation ce = c(x);
    DcEvaluation e;
    if (part != Part::Second) {
      e.f1.value = 2.0 * (pe.values.squaredNorm() + ce.values.squaredNorm());
      if (order != Order::Value)
        e.f1.gradient =
            4.0 * (pe.jacobian.transpose() * pe.values + ce.jacobian.transpose() * ce.values);
      if (order == Order::Hessian) {
        Matrix hess = pe.jacobian.transpose() * pe.jacobian + ce.jacobian.transpose() * ce.jacobian;
        for (int i = 0; i < dimension; ++i)
          hess += pe.values[i] * pe.hessians[i] + ce.values[i] * ce.hessians[i];
        e.f1.hessian = 4.0 * hess;
      }
    }
    if (part != Part::First) {
      const Vector s = pe.values + ce.values;
      e.f2.value = s.squaredNorm();
      if (order != Order::Value) {
        const Matrix js = pe.jacobian + ce.jacobian;
        e.f2.gradient = 2.0 * js.transpose() * s;
        if (order == Order::Hessian) {
          Matrix hess = js.transpose() * js;
          for (int i = 0; i < dimension; ++i) hess += s[i] * (pe.hessians[i] + ce.hessians[i]);
          e.f2.hessian = 2.0 * hess;
        }
      }
    }
    return e;
  };
  return DcProblem(dimension, eval, rho, 0.0, 0.0, std::move(name));
}

DcProblem make_expsys_problem(double rho) {
  auto p = [](const Vector& x) {
    const double ex = std::exp(x[0]);
    SystemEvaluation s;
    s.values = Vector::Constant(1, ex);
    s.jacobian = Matrix::Constant(1, 1, ex);
    s.hessians = {Matrix::Constant(1, 1, ex)};
    return s;
  };
  auto c = [](const Vector&) {
    SystemEvaluation s;
    s.values = Vector::Ones(1);
    s.jacobian = Matrix::Zero(1, 1);
    s.hessians = {Matrix::Zero(1, 1)};
    return s;
  };
  return make_system_problem(p, c, 1, rho, "expsys");
}

DcProblem make_builtin_problem(const std::string& name) {
  if (name == "quartic") return make_quartic_problem();
  if (name == "expsys") return make_expsys_problem();
  throw std::invalid_argument("unknown builtin problem '" + name + "' (expected quartic|expsys)");
}

DerivativeCheck check_derivatives(const DcProblem& problem, const Vector& x) {
  const int m = problem.dimension();
  const double h = 1e-6 * (1.0 + x.norm());
  const DcEvaluation at = problem.evaluate(x, Order::Hessian);
  if (!at.finite) throw std::domain_error("check_derivatives: non-finite evaluation");

  Vector fd_grad1(m), fd_grad2(m);
  Matrix fd_hess1(m, m), fd_hess2(m, m);
  for (int i = 0; i < m; ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const DcEvaluation ep = problem.evaluate(xp, Order::Gradient);
    const DcEvaluation em = problem.evaluate(xm, Order::Gradient);
    fd_grad1[i] = (ep.f1.value - em.f1.value) / (2.0 * h);
    fd_grad2[i] = (ep.f2.value - em.f2.value) / (2.0 * h);
    fd_hess1.col(i) = (ep.f1.gradient - em.f1.gradient) / (2.0 * h);
    fd_hess2.col(i) = (ep.f2.gradient - em.f2.gradient) / (2.0 * h);
  }

  auto rel = [](const auto& approx, const auto& exact) {
    return (approx - exact).norm() / std::max(exact.norm(), 1.0);
  };
  auto asym = [](const Matrix& hess) {
    return (hess - hess.transpose()).cwiseAbs().maxCoeff() / std::max(hess.norm(), 1.0);
  };

  DerivativeCheck out;
  out.gradient_rel_error = std::max(rel(fd_grad1, at.f1.gradient), rel(fd_grad2, at.f2.gradient));
  out.hessian_rel_error = std::max(rel(fd_hess1, at.f1.hessian), rel(fd_hess2, at.f2.hessian));
  out.hessian_asymmetry = std::max(asym(at.f1.hessian), asym(at.f2.hessian));
  return out;
}

}  // namespace bdca
