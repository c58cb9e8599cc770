#include "sgpnp/rng.hpp"

#include "sgpnp/error.hpp"

#include <cmath>
#include <numbers>

namespace sgpnp {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

} // namespace

std::uint64_t Rng::splitmix64(std::uint64_t &state)
{
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed)
  : seed_(seed)
{
  std::uint64_t sm = seed;
  for (auto &w : s_) {
    w = splitmix64(sm);
  }
}

std::uint64_t Rng::next_u64()
{
  std::uint64_t const result = rotl(s_[1] * 5, 7) * 9;
  std::uint64_t const t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  ++counter_;
  return result;
}

double Rng::uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal()
{
  if (cached_) {
    double const z = *cached_;
    cached_.reset();
    return z;
  }
  double const u1 = double((next_u64() >> 11) + 1) * 0x1.0p-53;
  double const u2 = double(next_u64() >> 11) * 0x1.0p-53;
  double const r = std::sqrt(-2.0 * std::log(u1));
  double const angle = 2.0 * std::numbers::pi * u2;
  cached_ = r * std::sin(angle);
  return r * std::cos(angle);
}

Rng Rng::child(std::uint64_t a, std::uint64_t b) const
{
  std::uint64_t state = seed_;
  std::uint64_t key = splitmix64(state);
  state ^= a + 0x632be59bd9b4e019ull;
  key ^= splitmix64(state);
  state ^= b + 0x85157af5ull;
  key ^= splitmix64(state);
  return Rng(key);
}

Signal gaussian(Rng &rng, Shape const &shape, bool is_complex)
{
  if (shape.empty() || product(shape) == 0) {
    throw ShapeError("gaussian: shape must be nonempty with positive dimensions");
  }
  Signal out(shape, is_complex);
  for (auto &v : out.data()) {
    v = rng.normal();
  }
  return out;
}

Signal gaussian_like(Rng &rng, Signal const &like) { return gaussian(rng, like.shape(), like.is_complex()); }

} // namespace sgpnp
