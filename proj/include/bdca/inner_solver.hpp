#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "bdca/problem.hpp"

namespace bdca {

/// Raised when a linear solve or the subproblem minimization cannot reach
/// its tolerance or meets non-finite values.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InnerConfig {
  double tol_grad = 1e-8;
  /// Also stop once the Newton step is below tol_step * (1 + |y|); this is
  /// what terminates solves whose gradient residual sits on the rounding
  /// floor of a badly scaled objective.
  double tol_step = 1e-8;
  int max_iters = 200;
  double damping_floor = 1e-10;
};

/// Strongly convex objective F(x) = g(x) - <linear_term, x>
///                                  + proximal_weight |x - proximal_center|^2.
struct SubproblemSpec {
  std::function<PartEvaluation(const Vector&, Order)> eval_g;
  Vector linear_term;
  std::optional<Vector> proximal_center;
  double proximal_weight = 0.0;  // 1 / (2 c_k)
  double modulus = 0.0;          // lower bound on the spectrum of the Hessian of F

  /// F and its derivatives at x; value is +inf when g is not finite there.
  PartEvaluation objective(const Vector& x, Order order) const;
};

struct InnerResult {
  Vector y;
  int iters = 0;
  double residual = 0.0;
  bool step_converged = false;  // stopped on tol_step rather than tol_grad
};

/// Damped Newton with Armijo backtracking (slope factor 1e-4, halving),
/// warm-started at x_init. Stops when
///   |grad F(y)| <= tol_grad * max(1, |linear_term|)
/// or when the undamped Newton step is below tol_step * (1 + |y|).
/// F never increases by more than 64 ulps of |F|; once the predicted
/// decrease is below that resolution, steps are accepted on a strict
/// decrease of the gradient residual.
/// Throws NumericalError on iteration exhaustion or non-finite derivatives.
InnerResult minimize_subproblem(const SubproblemSpec& spec, const Vector& x_init,
                                const InnerConfig& cfg);

struct SpdSolution {
  Vector d;
  double damping = 0.0;
};

/// Solves (H + mu I) d = b for the smallest mu in {0, floor * 4^i} whose
/// Cholesky factorization succeeds. Throws NumericalError once mu exceeds
/// 1e6 * |H|_inf.
SpdSolution spd_solve(const Matrix& hessian, const Vector& rhs, double damping_floor);

}  // namespace bdca
