#include "sgpnp/metrics.hpp"

#include "sgpnp/error.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace sgpnp {

namespace {

void check_pair(Signal const &x, Signal const &ref)
{
  if (x.shape() != ref.shape() || x.is_complex() != ref.is_complex()) {
    throw ShapeError("metric inputs differ in shape: " + to_string(x.shape()) + " vs " + to_string(ref.shape()));
  }
  if (x.elements() == 0) {
    throw ShapeError("metric on an empty signal");
  }
}

// Half-sample symmetric reflection: ... c b a | a b c ... | c b a ...
std::size_t reflect(long i, long n)
{
  long const period = 2 * n;
  long m = i % period;
  if (m < 0) {
    m += period;
  }
  return std::size_t(m < n ? m : period - 1 - m);
}

using Image = std::vector<double>;

Image blur(Image const &img, std::size_t rows, std::size_t cols, std::vector<double> const &w)
{
  long const r = long(w.size() / 2);
  Image tmp(img.size(), 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      double acc = 0.0;
      for (long k = -r; k <= r; ++k) {
        acc += w[std::size_t(k + r)] * img[i * cols + reflect(long(j) + k, long(cols))];
      }
      tmp[i * cols + j] = acc;
    }
  }
  if (rows == 1) {
    return tmp;
  }
  Image out(img.size(), 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      double acc = 0.0;
      for (long k = -r; k <= r; ++k) {
        acc += w[std::size_t(k + r)] * tmp[reflect(long(i) + k, long(rows)) * cols + j];
      }
      out[i * cols + j] = acc;
    }
  }
  return out;
}

} // namespace

double psnr(Signal const &x, Signal const &ref, double peak)
{
  check_pair(x, ref);
  if (!(peak > 0.0)) {
    throw DomainError("PSNR peak must be positive");
  }
  Signal const a = magnitude(x);
  Signal const b = magnitude(ref);
  double se = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double const d = a[i] - b[i];
    se += d * d;
  }
  if (se == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  double const mse = se / double(a.size());
  return 10.0 * std::log10(peak * peak / mse);
}

double ssim(Signal const &x, Signal const &ref, SsimWindow const &window)
{
  check_pair(x, ref);
  if (x.rank() > 2) {
    throw ShapeError("SSIM supports rank-1 and rank-2 signals");
  }
  if (window.size % 2 == 0 || !(window.sigma > 0.0)) {
    throw DomainError("SSIM window size must be odd and sigma positive");
  }
  std::size_t const rows = x.rank() == 2 ? x.shape()[0] : 1;
  std::size_t const cols = x.rank() == 2 ? x.shape()[1] : x.shape()[0];
  Image const a = magnitude(x).values();
  Image const b = magnitude(ref).values();

  std::vector<double> w(window.size);
  long const r = long(window.size / 2);
  double total = 0.0;
  for (long k = -r; k <= r; ++k) {
    double const v = std::exp(-0.5 * double(k * k) / (window.sigma * window.sigma));
    w[std::size_t(k + r)] = v;
    total += v;
  }
  for (double &v : w) {
    v /= total;
  }

  Image aa(a.size()), bb(a.size()), ab(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  Image const mu_a = blur(a, rows, cols, w);
  Image const mu_b = blur(b, rows, cols, w);
  Image const s_aa = blur(aa, rows, cols, w);
  Image const s_bb = blur(bb, rows, cols, w);
  Image const s_ab = blur(ab, rows, cols, w);

  double const c1 = std::pow(window.k1 * window.data_range, 2);
  double const c2 = std::pow(window.k2 * window.data_range, 2);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double const ma = mu_a[i];
    double const mb = mu_b[i];
    double const va = s_aa[i] - ma * ma;
    double const vb = s_bb[i] - mb * mb;
    double const cov = s_ab[i] - ma * mb;
    acc += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return acc / double(a.size());
}

} // namespace sgpnp
