#pragma once

#include "sgpnp/operators.hpp"

namespace sgpnp {

struct CgOptions
{
  double tolerance = 1e-10; // relative residual
  int max_iterations = 500;
};

/// Conjugate gradients on (I + gamma A*A) x = rhs, started from x0.
/// Throws ConvergenceError carrying the final residual norm.
Signal solve_normal_cg(LinearOperator const &op, Signal const &rhs, double gamma, Signal const &x0,
                       CgOptions const &options = {});

/// Quadratic data term g(x) = 0.5 ||y - A x||^2.
class FidelityProblem
{
public:
  FidelityProblem(LinearOperator op, Signal y, double eta = 0.0);

  LinearOperator const &op() const { return op_; }
  Signal const &y() const { return y_; }
  double eta() const { return eta_; }

  double value(Signal const &x) const;
  /// A*(A x - y).
  Signal gradient(Signal const &x) const;

  /// argmin_x 0.5 ||x - z||^2 + gamma g(x). Closed form where the operator
  /// supports it, conjugate gradients otherwise.
  Signal prox(Signal const &z, double gamma) const;
  /// Same map computed by conjugate gradients regardless of operator kind.
  Signal prox_cg(Signal const &z, double gamma, CgOptions const &options = {}) const;

  /// Image-space starting point: y itself when it lives in the input space,
  /// A* y otherwise.
  Signal initial_point() const;

private:
  LinearOperator op_;
  Signal y_;
  double eta_;
};

} // namespace sgpnp
