#pragma once

#include "sgpnp/signal.hpp"

namespace sgpnp {

/// Unitary DFT over every axis of a rank-1 or rank-2 signal.
///
/// Real inputs are promoted to complex. Power-of-two axis lengths use an
/// iterative radix-2 transform; other lengths up to kMaxDirectLength use the
/// direct O(n^2) sum. Longer non-power-of-two axes and rank > 2 are rejected
/// with ShapeError.
Signal fft2(Signal const &s);
Signal ifft2(Signal const &s);

inline constexpr std::size_t kMaxDirectLength = 4096;

} // namespace sgpnp
