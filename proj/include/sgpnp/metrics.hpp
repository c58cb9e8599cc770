#pragma once

#include "sgpnp/signal.hpp"

namespace sgpnp {

/// 10 log10(peak^2 / MSE); +inf when the signals are identical. Complex
/// signals are compared through their magnitudes.
double psnr(Signal const &x, Signal const &ref, double peak);

struct SsimWindow
{
  std::size_t size = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  /// Dynamic range L in the stabilizers (k1 L)^2 and (k2 L)^2.
  double data_range = 1.0;
};

/// Mean SSIM with a separable Gaussian window and symmetric (half-sample)
/// reflection at the borders. Rank-1 signals are treated as 1 x n images;
/// complex signals through their magnitudes.
double ssim(Signal const &x, Signal const &ref, SsimWindow const &window = {});

} // namespace sgpnp
