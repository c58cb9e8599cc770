#pragma once

#include "sgpnp/signal.hpp"

#include <array>
#include <cstdint>
#include <optional>

namespace sgpnp {

/// Reproducible random stream.
///
/// Generator: xoshiro256** whose 256-bit state is filled by four successive
/// SplitMix64 outputs starting from `seed`. Uniforms use the top 53 bits of a
/// draw. Normals use the basic Box-Muller transform on a pair (u1, u2) with
/// u1 = (k1 + 1) * 2^-53 in (0, 1] and u2 = k2 * 2^-53 in [0, 1):
///
///   r = sqrt(-2 ln u1),  z0 = r cos(2 pi u2),  z1 = r sin(2 pi u2)
///
/// z0 is returned first and z1 is cached for the next call. Child streams are
/// seeded from SplitMix64 applied to (seed, key_a, key_b), so a stream is fully
/// determined by its seed and the keys used to derive it.
class Rng
{
public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }
  /// Number of 64-bit words drawn so far.
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform();
  double normal();

  /// Independent stream keyed by (a, b); does not advance this stream.
  Rng child(std::uint64_t a, std::uint64_t b = 0) const;

  static std::uint64_t splitmix64(std::uint64_t &state);

private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
  std::uint64_t counter_ = 0;
  std::optional<double> cached_;
};

/// I.i.d. standard-normal signal. Complex signals draw re and im independently.
Signal gaussian(Rng &rng, Shape const &shape, bool is_complex = false);
Signal gaussian_like(Rng &rng, Signal const &like);

} // namespace sgpnp
