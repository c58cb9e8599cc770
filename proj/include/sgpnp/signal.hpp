#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sgpnp {

using Shape = std::vector<std::size_t>;

std::size_t product(Shape const &shape);
std::string to_string(Shape const &shape);

/// Dense row-major array of doubles with an explicit logical shape.
///
/// Complex signals keep the logical shape of the array and store each element
/// as an interleaved (re, im) pair, so size() == 2 * product(shape).
class Signal
{
public:
  Signal() = default;
  explicit Signal(Shape shape, bool is_complex = false);
  Signal(Shape shape, std::vector<double> data, bool is_complex = false);

  static Signal from_vector(Eigen::VectorXd const &v, Shape shape, bool is_complex = false);
  static Signal zeros_like(Signal const &other);

  Shape const &shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  bool is_complex() const { return complex_; }
  bool empty() const { return data_.empty(); }

  /// Number of stored real scalars.
  std::size_t size() const { return data_.size(); }
  /// Number of logical elements, product(shape).
  std::size_t elements() const { return product(shape_); }

  std::span<double const> data() const { return data_; }
  std::span<double> data() { return data_; }
  std::vector<double> const &values() const { return data_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double &operator[](std::size_t i) { return data_[i]; }

  Eigen::Map<Eigen::VectorXd const> vec() const { return {data_.data(), Eigen::Index(data_.size())}; }
  Eigen::Map<Eigen::VectorXd> vec() { return {data_.data(), Eigen::Index(data_.size())}; }

  bool same_layout(Signal const &other) const
  {
    return shape_ == other.shape_ && complex_ == other.complex_;
  }

  Signal &operator+=(Signal const &other);
  Signal &operator-=(Signal const &other);
  Signal &operator*=(double alpha);

  friend bool operator==(Signal const &, Signal const &) = default;

private:
  Shape shape_;
  std::vector<double> data_;
  bool complex_ = false;
};

Signal operator+(Signal a, Signal const &b);
Signal operator-(Signal a, Signal const &b);
Signal operator*(double alpha, Signal a);

void require_same_layout(Signal const &a, Signal const &b, char const *what);

/// alpha * x + y
Signal axpy(double alpha, Signal const &x, Signal const &y);
Signal scale(double alpha, Signal const &x);
/// Real inner product; complex signals are treated as pairs in R^2.
double dot(Signal const &a, Signal const &b);
double norm2(Signal const &x);
double max_abs_diff(Signal const &a, Signal const &b);
bool all_finite(Signal const &x);

/// Real part of a complex signal, or a copy of a real one.
Signal real_part(Signal const &x);
/// Promote a real signal to complex with zero imaginary part.
Signal to_complex(Signal const &x);
/// Elementwise modulus for complex signals, identity for real ones.
Signal magnitude(Signal const &x);

/// FNV-1a over the raw payload bytes and shape; used for trace hashes.
std::uint64_t hash(Signal const &x);

} // namespace sgpnp
