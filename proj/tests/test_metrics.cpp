#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sgpnp/error.hpp"
#include "sgpnp/metrics.hpp"
#include "sgpnp/rng.hpp"

#include <cmath>
#include <limits>

using namespace sgpnp;

namespace {

long mirror(long i, long n)
{
  while (i < 0 || i >= n) {
    i = i < 0 ? -i - 1 : 2 * n - i - 1;
  }
  return i;
}

// Direct 2-D windowed statistics, no separability.
double naive_ssim(Signal const &x, Signal const &y, std::size_t rows, std::size_t cols, SsimWindow const &w)
{
  long const r = long(w.size / 2);
  std::vector<double> g;
  double total = 0.0;
  for (long k = -r; k <= r; ++k) {
    g.push_back(std::exp(-double(k * k) / (2 * w.sigma * w.sigma)));
    total += g.back();
  }
  for (auto &v : g) {
    v /= total;
  }
  double const c1 = (w.k1 * w.data_range) * (w.k1 * w.data_range);
  double const c2 = (w.k2 * w.data_range) * (w.k2 * w.data_range);
  double acc = 0.0;
  for (long i = 0; i < long(rows); ++i) {
    for (long j = 0; j < long(cols); ++j) {
      double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
      for (long a = -r; a <= r; ++a) {
        for (long b = -r; b <= r; ++b) {
          double const wt = (rows == 1 ? (a == 0 ? 1.0 : 0.0) : g[std::size_t(a + r)]) * g[std::size_t(b + r)];
          std::size_t const p = std::size_t(mirror(i + a, long(rows)) * long(cols) + mirror(j + b, long(cols)));
          mx += wt * x[p];
          my += wt * y[p];
          sxx += wt * x[p] * x[p];
          syy += wt * y[p] * y[p];
          sxy += wt * x[p] * y[p];
        }
      }
      double const vx = sxx - mx * mx, vy = syy - my * my, cxy = sxy - mx * my;
      acc += (2 * mx * my + c1) * (2 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
  }
  return acc / double(rows * cols);
}

} // namespace

TEST_CASE("psnr of known errors")
{
  Signal const ref({4}, std::vector<double>{0, 0, 0, 0});
  Signal const x({4}, std::vector<double>{0.1, -0.1, 0.1, -0.1});
  CHECK(psnr(x, ref, 1.0) == doctest::Approx(20.0));
  CHECK(psnr(x, ref, 10.0) == doctest::Approx(40.0));
  CHECK(psnr(ref, ref, 1.0) == std::numeric_limits<double>::infinity());
  Signal const z({1}, std::vector<double>{3, 4}, true);
  Signal const zr({1}, std::vector<double>{5, 0}, true);
  CHECK(psnr(z, zr, 1.0) == std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(psnr(x, Signal({3}), 1.0), ShapeError);
  CHECK_THROWS_AS(psnr(x, ref, 0.0), DomainError);
}

TEST_CASE("ssim equals a direct windowed computation")
{
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t const rows = 1 + std::size_t(rng.uniform() * 12);
    std::size_t const cols = 2 + std::size_t(rng.uniform() * 12);
    Signal const a = gaussian(rng, {rows, cols});
    Signal const b = a + scale(0.3, gaussian(rng, {rows, cols}));
    SsimWindow w;
    w.size = trial % 2 ? 7 : 11;
    w.data_range = 2.0;
    CHECK(ssim(a, b, w) == doctest::Approx(naive_ssim(a, b, rows, cols, w)).epsilon(1e-12));
  }
}

TEST_CASE("ssim properties")
{
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    Signal const a = gaussian(rng, {8, 8});
    Signal const b = gaussian(rng, {8, 8});
    CHECK(ssim(a, a) == doctest::Approx(1.0));
    CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)));
    CHECK(ssim(a, b) <= 1.0 + 1e-12);
    CHECK(ssim(a, b) >= -1.0 - 1e-12);
  }
  Signal const v = gaussian(rng, {16});
  CHECK(ssim(v, v) == doctest::Approx(1.0));
  CHECK_THROWS_AS(ssim(Signal({2, 2, 2}), Signal({2, 2, 2})), ShapeError);
  SsimWindow even;
  even.size = 4;
  CHECK_THROWS_AS(ssim(v, v, even), DomainError);
}
