#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace sgpnp {

/// Gauss-Hermite rule for the standard normal weight: sum_i w_i f(x_i)
/// approximates E[f(n)], n ~ N(0, 1). Nodes and weights come from the
/// eigen-decomposition of the Jacobi matrix (Golub-Welsch).
struct GaussHermiteRule
{
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussHermiteRule gauss_hermite(std::size_t order);

enum class ExpectationMethod
{
  Auto,
  Quadrature,
  MonteCarlo,
};

struct QuadratureSpec
{
  ExpectationMethod method = ExpectationMethod::Auto;
  /// 0 picks 32 for d <= 2 and 20 otherwise.
  std::size_t order = 0;
  std::size_t max_quadrature_dim = 4;
  std::size_t mc_samples = 100000;
  std::uint64_t seed = 0x5eed;

  bool use_quadrature(std::size_t dim) const;
  std::size_t order_for(std::size_t dim) const;
};

struct Estimate
{
  Eigen::VectorXd value;
  /// Zero for quadrature.
  Eigen::VectorXd std_error;
  std::size_t samples = 0;
  bool quadrature = false;
};

using NoiseFunction = std::function<Eigen::VectorXd(Eigen::VectorXd const &)>;

/// E[f(n)] over n ~ N(0, I_dim) with `out_dim`-dimensional f, either by the
/// tensor-product Gauss-Hermite rule or by Monte Carlo with standard errors.
/// Throws DomainError when quadrature is forced beyond max_quadrature_dim.
Estimate gaussian_expectation(std::size_t dim, std::size_t out_dim, NoiseFunction const &f,
                              QuadratureSpec const &spec = {});

/// Monte Carlo mean and standard error of f(n) over `samples` draws.
/// Draws are split into fixed chunks with their own child streams of `seed`
/// and combined in chunk order, so the result does not depend on the number
/// of worker threads.
Estimate monte_carlo_mean(std::size_t dim, std::size_t out_dim, NoiseFunction const &f, std::size_t samples,
                          std::uint64_t seed);

/// Sample moments of a scalar statistic s(n) over i.i.d. draws.
struct MomentStats
{
  std::size_t samples = 0;
  double mean = 0.0;
  double variance = 0.0;      // unbiased
  double fourth_central = 0.0; // m4
};

MomentStats monte_carlo_moments(std::size_t dim, std::function<double(Eigen::VectorXd const &)> const &f,
                                std::size_t samples, std::uint64_t seed);

} // namespace sgpnp
