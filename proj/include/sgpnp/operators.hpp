#pragma once

#include "sgpnp/signal.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <memory>
#include <optional>
#include <string>

namespace sgpnp {

class Rng;

enum class OperatorKind
{
  Mask,
  CircularConvolution,
  Decimation,
  SubsampledFrequency,
  DenseMatrix,
  Composed,
};

std::string to_string(OperatorKind kind);

/// Linear forward map A with its adjoint. Immutable and cheap to copy.
class LinearOperator
{
public:
  /// Coordinate mask with entries in {0, 1}; applies to real signals of the
  /// mask's shape, or to complex ones when `complex_signals` is set.
  static LinearOperator mask(Signal const &mask, bool complex_signals = false);
  /// Circular convolution of a real image with `kernel`. The kernel's centre
  /// element (index size/2 along each axis) is placed at the origin.
  static LinearOperator convolution(Signal const &kernel, Shape const &image_shape);
  /// Keeps every `factor`-th sample along each axis, starting at index 0.
  static LinearOperator decimation(Shape const &input_shape, std::size_t factor);
  /// Unitary DFT followed by a {0,1} frequency mask; complex in, complex out.
  static LinearOperator subsampled_frequency(Signal const &frequency_mask);
  /// Explicit matrix acting on real vectors of length cols.
  static LinearOperator dense(Eigen::MatrixXd matrix);
  /// outer * inner.
  static LinearOperator compose(LinearOperator const &outer, LinearOperator const &inner);

  OperatorKind kind() const;
  Shape const &input_shape() const;
  Shape const &output_shape() const;
  bool input_complex() const;
  bool output_complex() const;

  Signal apply(Signal const &x) const;
  Signal adjoint(Signal const &r) const;

  /// Solves (I + gamma A*A) x = rhs in closed form when the kind allows it:
  /// per-coordinate for Mask and Decimation, per-frequency for
  /// CircularConvolution and SubsampledFrequency. Empty for the rest.
  std::optional<Signal> solve_normal(Signal const &rhs, double gamma) const;

  /// Largest singular value when known in closed form.
  std::optional<double> norm_bound() const;

  Signal zeros_input() const;
  Signal zeros_output() const;

  nlohmann::json describe() const;

  struct Impl;

private:
  explicit LinearOperator(std::shared_ptr<Impl const> impl);
  std::shared_ptr<Impl const> impl_;
};

/// Power-iteration estimate of the operator norm.
double estimate_operator_norm(LinearOperator const &op, Rng &rng, int iterations = 200);

/// Unnormalized DFT of the zero-padded, centred kernel.
Signal kernel_spectrum(Signal const &kernel, Shape const &image_shape);

Signal gaussian_kernel(std::size_t size, double width);
/// Line kernel of the given length and angle, normalized to unit sum.
Signal motion_kernel(std::size_t size, double angle_deg);

/// Variable-density column mask: `center_fraction` of low-frequency columns
/// always kept, further columns drawn uniformly until 1/acceleration of all
/// columns are kept. Low frequencies sit at index 0 (unshifted layout).
Signal frequency_column_mask(Shape const &shape, double acceleration, double center_fraction, Rng &rng);

/// Random {0,1} mask keeping round(keep_fraction * n) coordinates.
Signal random_mask(Shape const &shape, double keep_fraction, Rng &rng);
/// Ones everywhere except a zero rectangle [r0, r0+h) x [c0, c0+w).
Signal box_mask(Shape const &shape, std::size_t r0, std::size_t c0, std::size_t h, std::size_t w);

} // namespace sgpnp
