#include "sgpnp/fidelity.hpp"

#include "sgpnp/error.hpp"

#include <cmath>

namespace sgpnp {

Signal solve_normal_cg(LinearOperator const &op, Signal const &rhs, double gamma, Signal const &x0,
                       CgOptions const &options)
{
  auto normal = [&](Signal const &v) { return axpy(gamma, op.adjoint(op.apply(v)), v); };
  double const bnorm = norm2(rhs);
  if (bnorm == 0.0) {
    return Signal::zeros_like(rhs);
  }
  Signal x = x0;
  Signal r = rhs - normal(x);
  Signal p = r;
  double rr = dot(r, r);
  for (int it = 0; it < options.max_iterations; ++it) {
    if (std::sqrt(rr) <= options.tolerance * bnorm) {
      return x;
    }
    Signal const q = normal(p);
    double const alpha = rr / dot(p, q);
    x = axpy(alpha, p, x);
    r = axpy(-alpha, q, r);
    double const rr_next = dot(r, r);
    p = axpy(rr_next / rr, p, r);
    rr = rr_next;
  }
  if (std::sqrt(rr) <= options.tolerance * bnorm) {
    return x;
  }
  throw ConvergenceError("conjugate gradients did not converge in " + std::to_string(options.max_iterations) +
                           " iterations",
                         std::sqrt(rr));
}

FidelityProblem::FidelityProblem(LinearOperator op, Signal y, double eta)
  : op_(std::move(op))
  , y_(std::move(y))
  , eta_(eta)
{
  if (y_.shape() != op_.output_shape() || y_.is_complex() != op_.output_complex()) {
    throw ShapeError("measurement shape " + to_string(y_.shape()) + " does not match operator output " +
                     to_string(op_.output_shape()));
  }
  if (eta_ < 0.0) {
    throw DomainError("measurement noise level must be nonnegative");
  }
}

double FidelityProblem::value(Signal const &x) const
{
  double const r = norm2(op_.apply(x) - y_);
  return 0.5 * r * r;
}

Signal FidelityProblem::gradient(Signal const &x) const { return op_.adjoint(op_.apply(x) - y_); }

Signal FidelityProblem::prox(Signal const &z, double gamma) const
{
  if (!(gamma > 0.0)) {
    throw DomainError("prox step gamma must be positive");
  }
  Signal rhs = axpy(gamma, op_.adjoint(y_), z);
  if (auto closed = op_.solve_normal(rhs, gamma)) {
    return std::move(*closed);
  }
  return solve_normal_cg(op_, rhs, gamma, z);
}

Signal FidelityProblem::prox_cg(Signal const &z, double gamma, CgOptions const &options) const
{
  if (!(gamma > 0.0)) {
    throw DomainError("prox step gamma must be positive");
  }
  Signal rhs = axpy(gamma, op_.adjoint(y_), z);
  return solve_normal_cg(op_, rhs, gamma, z, options);
}

Signal FidelityProblem::initial_point() const
{
  if (y_.shape() == op_.input_shape() && y_.is_complex() == op_.input_complex()) {
    return y_;
  }
  return op_.adjoint(y_);
}

} // namespace sgpnp
