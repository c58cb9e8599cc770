#include "sgpnp/operators.hpp"

#include "sgpnp/error.hpp"
#include "sgpnp/fft.hpp"
#include "sgpnp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace sgpnp {

std::string to_string(OperatorKind kind)
{
  switch (kind) {
  case OperatorKind::Mask: return "mask";
  case OperatorKind::CircularConvolution: return "convolution";
  case OperatorKind::Decimation: return "decimation";
  case OperatorKind::SubsampledFrequency: return "subsampled_frequency";
  case OperatorKind::DenseMatrix: return "dense";
  case OperatorKind::Composed: return "composed";
  }
  return "unknown";
}

struct LinearOperator::Impl
{
  OperatorKind kind;
  Shape in_shape;
  Shape out_shape;
  bool in_complex = false;
  bool out_complex = false;

  Signal mask;     // Mask, SubsampledFrequency, and the sampling pattern of Decimation
  Signal kernel;   // CircularConvolution, as given
  Signal spectrum; // CircularConvolution, complex
  std::size_t factor = 1;
  Eigen::MatrixXd matrix;
  std::shared_ptr<Impl const> outer;
  std::shared_ptr<Impl const> inner;
};

namespace {

using Impl = LinearOperator::Impl;

void check_input(Impl const &op, Signal const &x, char const *what)
{
  if (x.shape() != op.in_shape || x.is_complex() != op.in_complex) {
    throw ShapeError(std::string(what) + ": expected input " + to_string(op.in_shape) + (op.in_complex ? "c" : "") +
                     ", got " + to_string(x.shape()) + (x.is_complex() ? "c" : ""));
  }
}

void check_output(Impl const &op, Signal const &r, char const *what)
{
  if (r.shape() != op.out_shape || r.is_complex() != op.out_complex) {
    throw ShapeError(std::string(what) + ": expected output-space signal " + to_string(op.out_shape) +
                     (op.out_complex ? "c" : "") + ", got " + to_string(r.shape()) + (r.is_complex() ? "c" : ""));
  }
}

void check_binary_mask(Signal const &m)
{
  if (m.is_complex()) {
    throw DomainError("mask must be real");
  }
  for (double v : m.data()) {
    if (v != 0.0 && v != 1.0) {
      throw DomainError("mask entries must be 0 or 1");
    }
  }
}

// Multiplies every logical element of x by the real weight w[i].
Signal weight_elements(Signal const &x, Signal const &w)
{
  Signal out = x;
  std::size_t const stride = x.is_complex() ? 2 : 1;
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::size_t c = 0; c < stride; ++c) {
      out[stride * i + c] *= w[i];
    }
  }
  return out;
}

Signal multiply_spectrum(Signal const &xhat, Signal const &spec, bool conjugate)
{
  Signal out = xhat;
  for (std::size_t i = 0; i < spec.size() / 2; ++i) {
    double const a = xhat[2 * i], b = xhat[2 * i + 1];
    double const c = spec[2 * i], d = conjugate ? -spec[2 * i + 1] : spec[2 * i + 1];
    out[2 * i] = a * c - b * d;
    out[2 * i + 1] = a * d + b * c;
  }
  return out;
}

std::pair<std::size_t, std::size_t> grid_of(Shape const &s)
{
  return s.size() == 2 ? std::pair{s[0], s[1]} : std::pair{std::size_t{1}, s[0]};
}

Signal apply_impl(Impl const &op, Signal const &x);
Signal adjoint_impl(Impl const &op, Signal const &r);

Signal apply_impl(Impl const &op, Signal const &x)
{
  check_input(op, x, "apply");
  switch (op.kind) {
  case OperatorKind::Mask: return weight_elements(x, op.mask);
  case OperatorKind::CircularConvolution: return real_part(ifft2(multiply_spectrum(fft2(x), op.spectrum, false)));
  case OperatorKind::Decimation: {
    auto [rows, cols] = grid_of(op.in_shape);
    auto [orows, ocols] = grid_of(op.out_shape);
    Signal out(op.out_shape);
    for (std::size_t r = 0; r < orows; ++r) {
      for (std::size_t c = 0; c < ocols; ++c) {
        std::size_t const rr = (rows == 1) ? 0 : r * op.factor;
        out[r * ocols + c] = x[rr * cols + c * op.factor];
      }
    }
    return out;
  }
  case OperatorKind::SubsampledFrequency: return weight_elements(fft2(x), op.mask);
  case OperatorKind::DenseMatrix: {
    Eigen::VectorXd const y = op.matrix * x.vec();
    return Signal::from_vector(y, op.out_shape);
  }
  case OperatorKind::Composed: return apply_impl(*op.outer, apply_impl(*op.inner, x));
  }
  throw Error("unreachable operator kind");
}

Signal adjoint_impl(Impl const &op, Signal const &r)
{
  check_output(op, r, "adjoint");
  switch (op.kind) {
  case OperatorKind::Mask: return weight_elements(r, op.mask);
  case OperatorKind::CircularConvolution: return real_part(ifft2(multiply_spectrum(fft2(r), op.spectrum, true)));
  case OperatorKind::Decimation: {
    auto [rows, cols] = grid_of(op.in_shape);
    auto [orows, ocols] = grid_of(op.out_shape);
    Signal out(op.in_shape);
    for (std::size_t i = 0; i < orows; ++i) {
      for (std::size_t c = 0; c < ocols; ++c) {
        std::size_t const rr = (rows == 1) ? 0 : i * op.factor;
        out[rr * cols + c * op.factor] = r[i * ocols + c];
      }
    }
    return out;
  }
  case OperatorKind::SubsampledFrequency: return ifft2(weight_elements(r, op.mask));
  case OperatorKind::DenseMatrix: {
    Eigen::VectorXd const x = op.matrix.transpose() * r.vec();
    return Signal::from_vector(x, op.in_shape);
  }
  case OperatorKind::Composed: return adjoint_impl(*op.inner, adjoint_impl(*op.outer, r));
  }
  throw Error("unreachable operator kind");
}

// out[i] = x[i] / (1 + gamma * w[i]) per logical element
Signal divide_elements(Signal const &x, Signal const &w, double gamma)
{
  Signal d = w;
  for (auto &v : d.data()) {
    v = 1.0 / (1.0 + gamma * v);
  }
  return weight_elements(x, d);
}

} // namespace

LinearOperator::LinearOperator(std::shared_ptr<Impl const> impl)
  : impl_(std::move(impl))
{
}

LinearOperator LinearOperator::mask(Signal const &mask, bool complex_signals)
{
  check_binary_mask(mask);
  auto impl = std::make_shared<Impl>();
  impl->kind = OperatorKind::Mask;
  impl->in_shape = impl->out_shape = mask.shape();
  impl->in_complex = impl->out_complex = complex_signals;
  impl->mask = mask;
  return LinearOperator(impl);
}

Signal kernel_spectrum(Signal const &kernel, Shape const &image_shape)
{
  if (kernel.is_complex() || kernel.rank() != image_shape.size() || image_shape.size() > 2) {
    throw ShapeError("convolution kernel must be real with the image's rank (1 or 2)");
  }
  auto [rows, cols] = grid_of(image_shape);
  auto [kr, kc] = grid_of(kernel.shape());
  if (kr > rows || kc > cols) {
    throw ShapeError("convolution kernel larger than image");
  }
  Signal padded(image_shape);
  for (std::size_t i = 0; i < kr; ++i) {
    for (std::size_t j = 0; j < kc; ++j) {
      std::size_t const r = (i + rows - kr / 2) % rows;
      std::size_t const c = (j + cols - kc / 2) % cols;
      padded[r * cols + c] += kernel[i * kc + j];
    }
  }
  return std::sqrt(double(rows * cols)) * fft2(padded);
}

LinearOperator LinearOperator::convolution(Signal const &kernel, Shape const &image_shape)
{
  auto impl = std::make_shared<Impl>();
  impl->kind = OperatorKind::CircularConvolution;
  impl->in_shape = impl->out_shape = image_shape;
  impl->kernel = kernel;
  impl->spectrum = kernel_spectrum(kernel, image_shape);
  return LinearOperator(impl);
}

LinearOperator LinearOperator::decimation(Shape const &input_shape, std::size_t factor)
{
  if (factor == 0) {
    throw DomainError("decimation factor must be positive");
  }
  if (input_shape.empty() || input_shape.size() > 2) {
    throw ShapeError("decimation supports rank 1 and 2 signals");
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = OperatorKind::Decimation;
  impl->in_shape = input_shape;
  impl->factor = factor;
  for (auto d : input_shape) {
    impl->out_shape.push_back((d + factor - 1) / factor);
  }
  auto [rows, cols] = grid_of(input_shape);
  impl->mask = Signal(input_shape);
  for (std::size_t r = 0; r < rows; r += (rows == 1 ? 1 : factor)) {
    for (std::size_t c = 0; c < cols; c += factor) {
      impl->mask[r * cols + c] = 1.0;
    }
  }
  return LinearOperator(impl);
}

LinearOperator LinearOperator::subsampled_frequency(Signal const &frequency_mask)
{
  check_binary_mask(frequency_mask);
  if (frequency_mask.rank() > 2) {
    throw ShapeError("frequency mask must be rank 1 or 2");
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = OperatorKind::SubsampledFrequency;
  impl->in_shape = impl->out_shape = frequency_mask.shape();
  impl->in_complex = impl->out_complex = true;
  impl->mask = frequency_mask;
  return LinearOperator(impl);
}

LinearOperator LinearOperator::dense(Eigen::MatrixXd matrix)
{
  if (matrix.rows() == 0 || matrix.cols() == 0) {
    throw ShapeError("dense operator needs a non-empty matrix");
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = OperatorKind::DenseMatrix;
  impl->in_shape = {std::size_t(matrix.cols())};
  impl->out_shape = {std::size_t(matrix.rows())};
  impl->matrix = std::move(matrix);
  return LinearOperator(impl);
}

LinearOperator LinearOperator::compose(LinearOperator const &outer, LinearOperator const &inner)
{
  if (outer.input_shape() != inner.output_shape() || outer.input_complex() != inner.output_complex()) {
    throw ShapeError("compose: inner output " + to_string(inner.output_shape()) + " does not feed outer input " +
                     to_string(outer.input_shape()));
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = OperatorKind::Composed;
  impl->in_shape = inner.input_shape();
  impl->in_complex = inner.input_complex();
  impl->out_shape = outer.output_shape();
  impl->out_complex = outer.output_complex();
  impl->outer = outer.impl_;
  impl->inner = inner.impl_;
  return LinearOperator(impl);
}

OperatorKind LinearOperator::kind() const { return impl_->kind; }
Shape const &LinearOperator::input_shape() const { return impl_->in_shape; }
Shape const &LinearOperator::output_shape() const { return impl_->out_shape; }
bool LinearOperator::input_complex() const { return impl_->in_complex; }
bool LinearOperator::output_complex() const { return impl_->out_complex; }

Signal LinearOperator::apply(Signal const &x) const { return apply_impl(*impl_, x); }
Signal LinearOperator::adjoint(Signal const &r) const { return adjoint_impl(*impl_, r); }

Signal LinearOperator::zeros_input() const { return Signal(impl_->in_shape, impl_->in_complex); }
Signal LinearOperator::zeros_output() const { return Signal(impl_->out_shape, impl_->out_complex); }

std::optional<Signal> LinearOperator::solve_normal(Signal const &rhs, double gamma) const
{
  check_input(*impl_, rhs, "solve_normal");
  switch (impl_->kind) {
  case OperatorKind::Mask:
  case OperatorKind::Decimation: return divide_elements(rhs, impl_->mask, gamma);
  case OperatorKind::SubsampledFrequency: return ifft2(divide_elements(fft2(rhs), impl_->mask, gamma));
  case OperatorKind::CircularConvolution: {
    Signal power(impl_->in_shape);
    for (std::size_t i = 0; i < power.size(); ++i) {
      power[i] = impl_->spectrum[2 * i] * impl_->spectrum[2 * i] + impl_->spectrum[2 * i + 1] * impl_->spectrum[2 * i + 1];
    }
    return real_part(ifft2(divide_elements(fft2(rhs), power, gamma)));
  }
  case OperatorKind::DenseMatrix:
  case OperatorKind::Composed: return std::nullopt;
  }
  return std::nullopt;
}

std::optional<double> LinearOperator::norm_bound() const
{
  switch (impl_->kind) {
  case OperatorKind::Mask:
  case OperatorKind::Decimation:
  case OperatorKind::SubsampledFrequency: {
    auto const &m = impl_->mask.data();
    return *std::max_element(m.begin(), m.end());
  }
  case OperatorKind::CircularConvolution: {
    double best = 0.0;
    auto const &s = impl_->spectrum;
    for (std::size_t i = 0; i < s.size() / 2; ++i) {
      best = std::max(best, std::hypot(s[2 * i], s[2 * i + 1]));
    }
    return best;
  }
  default: return std::nullopt;
  }
}

nlohmann::json LinearOperator::describe() const
{
  nlohmann::json j;
  j["kind"] = to_string(impl_->kind);
  j["input_shape"] = impl_->in_shape;
  j["output_shape"] = impl_->out_shape;
  j["input_complex"] = impl_->in_complex;
  if (impl_->kind == OperatorKind::Decimation) {
    j["factor"] = impl_->factor;
  }
  if (impl_->kind == OperatorKind::Mask || impl_->kind == OperatorKind::SubsampledFrequency) {
    auto const &m = impl_->mask.data();
    j["kept"] = std::accumulate(m.begin(), m.end(), 0.0);
  }
  if (impl_->kind == OperatorKind::Composed) {
    j["outer"] = LinearOperator(impl_->outer).describe();
    j["inner"] = LinearOperator(impl_->inner).describe();
  }
  return j;
}

double estimate_operator_norm(LinearOperator const &op, Rng &rng, int iterations)
{
  Signal v = gaussian_like(rng, op.zeros_input());
  v *= 1.0 / norm2(v);
  double lambda = 0.0;
  for (int i = 0; i < iterations; ++i) {
    Signal w = op.adjoint(op.apply(v));
    lambda = norm2(w);
    if (lambda == 0.0) {
      return 0.0;
    }
    v = (1.0 / lambda) * w;
  }
  return std::sqrt(lambda);
}

Signal gaussian_kernel(std::size_t size, double width)
{
  if (size == 0 || width <= 0.0) {
    throw DomainError("gaussian kernel needs positive size and width");
  }
  Signal k({size, size});
  double const c = double(size - 1) / 2.0;
  double total = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = 0; j < size; ++j) {
      double const r2 = (i - c) * (i - c) + (j - c) * (j - c);
      total += k[i * size + j] = std::exp(-r2 / (2.0 * width * width));
    }
  }
  k *= 1.0 / total;
  return k;
}

Signal motion_kernel(std::size_t size, double angle_deg)
{
  if (size == 0) {
    throw DomainError("motion kernel needs positive size");
  }
  Signal k({size, size});
  double const c = double(size - 1) / 2.0;
  double const a = angle_deg * std::numbers::pi / 180.0;
  std::size_t const steps = 4 * size;
  for (std::size_t s = 0; s < steps; ++s) {
    double const t = -c + 2.0 * c * double(s) / double(steps - 1);
    auto const i = std::size_t(std::lround(c - t * std::sin(a)));
    auto const j = std::size_t(std::lround(c + t * std::cos(a)));
    k[std::min(i, size - 1) * size + std::min(j, size - 1)] += 1.0;
  }
  k *= 1.0 / double(steps);
  return k;
}

Signal frequency_column_mask(Shape const &shape, double acceleration, double center_fraction, Rng &rng)
{
  if (acceleration < 1.0 || center_fraction < 0.0 || center_fraction > 1.0) {
    throw DomainError("frequency mask needs acceleration >= 1 and center fraction in [0, 1]");
  }
  auto [rows, cols] = grid_of(shape);
  auto const keep = std::max<std::size_t>(1, std::size_t(std::lround(double(cols) / acceleration)));
  auto const center = std::min(keep, std::size_t(std::lround(center_fraction * double(cols))));
  std::vector<char> kept(cols, 0);
  // low frequencies: 0, 1, -1, 2, -2, ... in unshifted layout
  for (std::size_t i = 0; i < center; ++i) {
    std::size_t const off = (i + 1) / 2;
    kept[i % 2 ? off : (cols - off) % cols] = 1;
  }
  std::size_t have = std::count(kept.begin(), kept.end(), 1);
  while (have < keep) {
    auto const c = std::size_t(rng.uniform() * double(cols)) % cols;
    if (!kept[c]) {
      kept[c] = 1;
      ++have;
    }
  }
  Signal m(shape);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      m[r * cols + c] = kept[c] ? 1.0 : 0.0;
    }
  }
  return m;
}

Signal random_mask(Shape const &shape, double keep_fraction, Rng &rng)
{
  if (keep_fraction < 0.0 || keep_fraction > 1.0) {
    throw DomainError("mask keep fraction must lie in [0, 1]");
  }
  std::size_t const n = product(shape);
  auto const keep = std::size_t(std::lround(keep_fraction * double(n)));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  // Fisher-Yates with the documented stream so masks are reproducible.
  for (std::size_t i = n; i > 1; --i) {
    auto const j = std::size_t(rng.uniform() * double(i)) % i;
    std::swap(idx[i - 1], idx[j]);
  }
  Signal m(shape);
  for (std::size_t i = 0; i < keep; ++i) {
    m[idx[i]] = 1.0;
  }
  return m;
}

Signal box_mask(Shape const &shape, std::size_t r0, std::size_t c0, std::size_t h, std::size_t w)
{
  auto [rows, cols] = grid_of(shape);
  Signal m(shape, std::vector<double>(product(shape), 1.0));
  if (shape.size() == 1) {
    for (std::size_t c = r0; c < std::min(cols, r0 + h); ++c) {
      m[c] = 0.0;
    }
    return m;
  }
  for (std::size_t r = r0; r < std::min(rows, r0 + h); ++r) {
    for (std::size_t c = c0; c < std::min(cols, c0 + w); ++c) {
      m[r * cols + c] = 0.0;
    }
  }
  return m;
}

} // namespace sgpnp
