#include "sgpnp/signal.hpp"

#include "sgpnp/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>
#include <sstream>

namespace sgpnp {

std::size_t product(Shape const &shape)
{
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(Shape const &shape)
{
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    os << (i ? "," : "") << shape[i];
  }
  os << "]";
  return os.str();
}

namespace {

void check_shape(Shape const &shape)
{
  if (shape.empty()) {
    throw ShapeError("signal shape must have at least one dimension");
  }
  for (auto d : shape) {
    if (d == 0) {
      throw ShapeError("signal shape " + to_string(shape) + " has a zero-size dimension");
    }
  }
}

} // namespace

Signal::Signal(Shape shape, bool is_complex)
  : shape_(std::move(shape))
  , complex_(is_complex)
{
  check_shape(shape_);
  data_.assign(product(shape_) * (complex_ ? 2 : 1), 0.0);
}

Signal::Signal(Shape shape, std::vector<double> data, bool is_complex)
  : shape_(std::move(shape))
  , data_(std::move(data))
  , complex_(is_complex)
{
  check_shape(shape_);
  if (data_.size() != product(shape_) * (complex_ ? 2 : 1)) {
    throw ShapeError("signal payload of " + std::to_string(data_.size()) + " scalars does not match shape " +
                     to_string(shape_) + (complex_ ? " (complex)" : ""));
  }
}

Signal Signal::from_vector(Eigen::VectorXd const &v, Shape shape, bool is_complex)
{
  return Signal(std::move(shape), std::vector<double>(v.data(), v.data() + v.size()), is_complex);
}

Signal Signal::zeros_like(Signal const &other) { return Signal(other.shape_, other.complex_); }

void require_same_layout(Signal const &a, Signal const &b, char const *what)
{
  if (!a.same_layout(b)) {
    throw ShapeError(std::string(what) + ": layout mismatch " + to_string(a.shape()) +
                     (a.is_complex() ? "c" : "") + " vs " + to_string(b.shape()) + (b.is_complex() ? "c" : ""));
  }
}

Signal &Signal::operator+=(Signal const &other)
{
  require_same_layout(*this, other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) {
    data_[i] += other.data_[i];
  }
  return *this;
}

Signal &Signal::operator-=(Signal const &other)
{
  require_same_layout(*this, other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) {
    data_[i] -= other.data_[i];
  }
  return *this;
}

Signal &Signal::operator*=(double alpha)
{
  for (auto &v : data_) {
    v *= alpha;
  }
  return *this;
}

Signal operator+(Signal a, Signal const &b) { return a += b; }
Signal operator-(Signal a, Signal const &b) { return a -= b; }
Signal operator*(double alpha, Signal a) { return a *= alpha; }

Signal axpy(double alpha, Signal const &x, Signal const &y)
{
  require_same_layout(x, y, "axpy");
  Signal out = y;
  auto xs = x.data();
  auto os = out.data();
  for (std::size_t i = 0; i < os.size(); ++i) {
    os[i] += alpha * xs[i];
  }
  return out;
}

Signal scale(double alpha, Signal const &x) { return alpha * x; }

double dot(Signal const &a, Signal const &b)
{
  require_same_layout(a, b, "dot");
  double s = 0.0;
  auto as = a.data();
  auto bs = b.data();
  for (std::size_t i = 0; i < as.size(); ++i) {
    s += as[i] * bs[i];
  }
  return s;
}

double norm2(Signal const &x)
{
  // scaled accumulation avoids overflow for large entries
  double scale = 0.0;
  double ssq = 1.0;
  for (double v : x.data()) {
    if (v != 0.0) {
      double const a = std::abs(v);
      if (scale < a) {
        ssq = 1.0 + ssq * (scale / a) * (scale / a);
        scale = a;
      } else {
        ssq += (a / scale) * (a / scale);
      }
    }
  }
  return scale * std::sqrt(ssq);
}

double max_abs_diff(Signal const &a, Signal const &b)
{
  require_same_layout(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

bool all_finite(Signal const &x)
{
  return std::all_of(x.data().begin(), x.data().end(), [](double v) { return std::isfinite(v); });
}

Signal real_part(Signal const &x)
{
  if (!x.is_complex()) {
    return x;
  }
  Signal out(x.shape(), false);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = x[2 * i];
  }
  return out;
}

Signal to_complex(Signal const &x)
{
  if (x.is_complex()) {
    return x;
  }
  Signal out(x.shape(), true);
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[2 * i] = x[i];
  }
  return out;
}

Signal magnitude(Signal const &x)
{
  if (!x.is_complex()) {
    return x;
  }
  Signal out(x.shape(), false);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::hypot(x[2 * i], x[2 * i + 1]);
  }
  return out;
}

std::uint64_t hash(Signal const &x)
{
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](unsigned char const *p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  for (auto d : x.shape()) {
    std::uint64_t v = d;
    mix(reinterpret_cast<unsigned char const *>(&v), sizeof v);
  }
  unsigned char const c = x.is_complex() ? 1 : 0;
  mix(&c, 1);
  mix(reinterpret_cast<unsigned char const *>(x.data().data()), x.size() * sizeof(double));
  return h;
}

} // namespace sgpnp
