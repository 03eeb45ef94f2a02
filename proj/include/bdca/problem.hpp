#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bdca {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// How much of a function to evaluate.
enum class Order { Value, Gradient, Hessian };

/// Which convex part(s) of the decomposition to evaluate.
enum class Part { Both, First, Second };

/// Value and derivatives of one smooth convex function. Derivatives are
/// left empty when not requested.
struct PartEvaluation {
  double value = 0.0;
  Vector gradient;
  Matrix hessian;
};

struct DcEvaluation {
  PartEvaluation f1;
  PartEvaluation f2;
  /// False when the evaluator hit an overflow guard or produced a
  /// non-finite value.
  bool finite = true;
};

using DcEvaluator = std::function<DcEvaluation(const Vector& x, Order order, Part part)>;

/// A smooth DC program phi = f1 - f2 regularized as g - h with
///   g = f1 + rho/2 |x|^2,   h = f2 + rho/2 |x|^2.
/// sigma_g and sigma_h are the intrinsic strong-convexity moduli of f1 and
/// f2; g and h are then strongly convex with moduli sigma_g + rho and
/// sigma_h + rho.
///
/// Evaluators must be safe to call concurrently.
class DcProblem {
 public:
  DcProblem(int dimension, DcEvaluator evaluator, double rho = 0.0, double sigma_g = 0.0,
            double sigma_h = 0.0, std::string name = {});

  int dimension() const { return dimension_; }
  double rho() const { return rho_; }
  double sigma_g() const { return sigma_g_; }
  double sigma_h() const { return sigma_h_; }
  const std::string& name() const { return name_; }

  double modulus_g() const { return sigma_g_ + rho_; }
  double modulus_h() const { return sigma_h_ + rho_; }
  /// Constant of the per-iteration decrease phi(y) <= phi(x) - c |d|^2.
  double decrease_modulus() const { return 0.5 * (sigma_g_ + sigma_h_) + rho_; }

  /// Copy with a different regularization parameter.
  DcProblem with_rho(double rho) const;

  DcEvaluation evaluate(const Vector& x, Order order, Part part = Part::Both) const;

  /// f1 - f2, or +infinity when the evaluation is not finite.
  double phi(const Vector& x) const;
  /// Gradient of phi; throws std::domain_error on non-finite evaluation.
  Vector grad_phi(const Vector& x) const;

  /// g = f1 + rho/2 |x|^2 with the requested derivatives.
  PartEvaluation eval_g(const Vector& x, Order order) const;
  /// h = f2 + rho/2 |x|^2 with the requested derivatives.
  PartEvaluation eval_h(const Vector& x, Order order) const;

 private:
  int dimension_;
  DcEvaluator evaluator_;
  double rho_;
  double sigma_g_;
  double sigma_h_;
  std::string name_;
};

/// phi(x) = x^4/4 - x^2/2 split as f1 = x^4/4, f2 = x^2/2.
DcProblem make_quartic_problem();

/// Values, Jacobian and per-component Hessians of a map R^m -> R^m_+.
struct SystemEvaluation {
  Vector values;
  Matrix jacobian;
  std::vector<Matrix> hessians;  // hessians[i] = Hessian of component i
};
using SystemMap = std::function<SystemEvaluation(const Vector& x)>;

/// Zero-finding for p(x) = c(x) with componentwise convex, nonnegative p and
/// c, posed as phi = |p - c|^2 = 2(|p|^2 + |c|^2) - |p + c|^2.
DcProblem make_system_problem(SystemMap p, SystemMap c, int dimension, double rho = 0.0,
                              std::string name = "system");

/// One-dimensional instance p(x) = exp(x), c(x) = 1, so phi = (e^x - 1)^2.
DcProblem make_expsys_problem(double rho = 1.0);

/// Looks up a builtin problem by its stable name ("quartic", "expsys").
/// Throws std::invalid_argument for unknown names.
DcProblem make_builtin_problem(const std::string& name);

/// Result of comparing analytic derivatives with central differences.
struct DerivativeCheck {
  double gradient_rel_error = 0.0;    // worst of f1, f2
  double hessian_rel_error = 0.0;     // worst of f1, f2
  double hessian_asymmetry = 0.0;     // max |H - H^T| / max(1, |H|)
};

/// Central-difference validation of f1/f2 gradients (from values) and
/// Hessians (from gradients), step h = 1e-6 (1 + |x|).
DerivativeCheck check_derivatives(const DcProblem& problem, const Vector& x);

}  // namespace bdca
