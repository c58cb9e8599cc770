#include "sgpnp/fft.hpp"

#include "sgpnp/error.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace sgpnp {

namespace {

using Cx = std::complex<double>;

bool is_pow2(std::size_t n) { return n && !(n & (n - 1)); }

void check_length(std::size_t n)
{
  if (!is_pow2(n) && n > kMaxDirectLength) {
    throw ShapeError("fft: unsupported axis length " + std::to_string(n));
  }
}

// In-place transform of a strided line, unnormalized, sign = -1 forward.
void transform_line(std::vector<Cx> &line, int sign)
{
  std::size_t const n = line.size();
  if (n == 1) {
    return;
  }
  if (is_pow2(n)) {
    for (std::size_t i = 1, j = 0; i < n; ++i) {
      std::size_t bit = n >> 1;
      for (; j & bit; bit >>= 1) {
        j ^= bit;
      }
      j ^= bit;
      if (i < j) {
        std::swap(line[i], line[j]);
      }
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
      double const ang = sign * 2.0 * std::numbers::pi / double(len);
      for (std::size_t i = 0; i < n; i += len) {
        for (std::size_t k = 0; k < len / 2; ++k) {
          Cx const w = std::polar(1.0, ang * double(k));
          Cx const u = line[i + k];
          Cx const v = line[i + k + len / 2] * w;
          line[i + k] = u + v;
          line[i + k + len / 2] = u - v;
        }
      }
    }
    return;
  }
  std::vector<Cx> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    Cx acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      // reduce the index product mod n to keep the twiddle argument small
      std::size_t const m = (k * j) % n;
      acc += line[j] * std::polar(1.0, sign * 2.0 * std::numbers::pi * double(m) / double(n));
    }
    out[k] = acc;
  }
  line = std::move(out);
}

Signal transform(Signal const &s, int sign)
{
  if (s.rank() > 2) {
    throw ShapeError("fft: rank " + std::to_string(s.rank()) + " signals are not supported");
  }
  for (auto d : s.shape()) {
    check_length(d);
  }
  Signal out = to_complex(s);
  std::size_t const rows = s.rank() == 2 ? s.shape()[0] : 1;
  std::size_t const cols = s.rank() == 2 ? s.shape()[1] : s.shape()[0];
  auto buf = out.data();
  auto at = [&](std::size_t r, std::size_t c) -> std::pair<double &, double &> {
    std::size_t const i = 2 * (r * cols + c);
    return {buf[i], buf[i + 1]};
  };

  std::vector<Cx> line(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      auto [re, im] = at(r, c);
      line[c] = {re, im};
    }
    transform_line(line, sign);
    for (std::size_t c = 0; c < cols; ++c) {
      auto [re, im] = at(r, c);
      re = line[c].real();
      im = line[c].imag();
    }
  }
  if (rows > 1) {
    line.resize(rows);
    for (std::size_t c = 0; c < cols; ++c) {
      for (std::size_t r = 0; r < rows; ++r) {
        auto [re, im] = at(r, c);
        line[r] = {re, im};
      }
      transform_line(line, sign);
      for (std::size_t r = 0; r < rows; ++r) {
        auto [re, im] = at(r, c);
        re = line[r].real();
        im = line[r].imag();
      }
    }
  }
  out *= 1.0 / std::sqrt(double(rows * cols));
  return out;
}

} // namespace

Signal fft2(Signal const &s) { return transform(s, -1); }
Signal ifft2(Signal const &s) { return transform(s, +1); }

} // namespace sgpnp
