#pragma once

#include "sgpnp/signal.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <cstddef>
#include <filesystem>
#include <vector>

namespace sgpnp {

class Rng;

enum class CovarianceType
{
  Isotropic,
  Diagonal,
  Full,
};

/// Gaussian mixture sum_i w_i N(mu_i, Sigma_i) on R^d.
///
/// Each covariance is eigendecomposed once at construction. Smoothing by an
/// isotropic Gaussian keeps the eigenvectors, so every density, score,
/// denoiser and covariance at noise level sigma only rescales the stored
/// spectrum by lambda + sigma^2.
class GmmPrior
{
public:
  GmmPrior(std::vector<double> weights, std::vector<Eigen::VectorXd> means, std::vector<Eigen::MatrixXd> covariances);

  static GmmPrior isotropic(std::vector<double> weights, std::vector<Eigen::VectorXd> means,
                            std::vector<double> variances);
  static GmmPrior diagonal(std::vector<double> weights, std::vector<Eigen::VectorXd> means,
                           std::vector<Eigen::VectorXd> variances);

  std::size_t dim() const { return dim_; }
  std::size_t components() const { return weights_.size(); }
  CovarianceType covariance_type() const { return type_; }

  std::vector<double> const &weights() const { return weights_; }
  Eigen::VectorXd const &mean(std::size_t i) const { return means_[i]; }
  Eigen::MatrixXd covariance(std::size_t i) const;
  Eigen::VectorXd const &eigenvalues(std::size_t i) const { return lambda_[i]; }
  Eigen::VectorXd global_mean() const;

  /// Single-vector evaluations of the smoothed mixture p_sigma = p * N(0, sigma^2 I).
  double logpdf(Eigen::VectorXd const &x, double sigma) const;
  Eigen::VectorXd score(Eigen::VectorXd const &x, double sigma) const;
  /// Hessian of log p_sigma.
  Eigen::MatrixXd score_jacobian(Eigen::VectorXd const &x, double sigma) const;
  /// Posterior mean E[x0 | x0 + sigma n = x] as the responsibility-weighted
  /// component posterior means mu_i + Sigma_i (Sigma_i + sigma^2 I)^-1 (x - mu_i).
  Eigen::VectorXd denoise(Eigen::VectorXd const &x, double sigma) const;
  Eigen::MatrixXd posterior_cov(Eigen::VectorXd const &x, double sigma) const;
  /// Posterior component probabilities.
  Eigen::VectorXd responsibilities(Eigen::VectorXd const &x, double sigma) const;

  Eigen::VectorXd sample(Rng &rng) const;

  nlohmann::json to_json() const;
  static GmmPrior from_json(nlohmann::json const &j);
  static GmmPrior load(std::filesystem::path const &path);

private:
  struct Terms;
  Terms evaluate(Eigen::VectorXd const &x, double sigma) const;
  void check_input(Eigen::VectorXd const &x, double sigma) const;
  // Projects into / out of the eigenbasis of component i.
  Eigen::VectorXd to_basis(std::size_t i, Eigen::VectorXd const &v) const;
  Eigen::VectorXd from_basis(std::size_t i, Eigen::VectorXd const &v) const;

  std::size_t dim_ = 0;
  CovarianceType type_ = CovarianceType::Full;
  std::vector<double> weights_;
  std::vector<double> log_weights_;
  std::vector<Eigen::VectorXd> means_;
  std::vector<Eigen::VectorXd> lambda_;
  std::vector<Eigen::MatrixXd> basis_; // empty for isotropic and diagonal
};

/// Signal-level versions: the payload of `x` is split into consecutive blocks
/// of length prior.dim(), each an independent draw from the prior.
double gmm_smoothed_logpdf(GmmPrior const &prior, Signal const &x, double sigma);
Signal gmm_smoothed_score(GmmPrior const &prior, Signal const &x, double sigma);
Signal gmm_mmse_denoise(GmmPrior const &prior, Signal const &x, double sigma);
/// Block-diagonal posterior covariance as a dense size() x size() matrix.
Eigen::MatrixXd gmm_posterior_cov(GmmPrior const &prior, Signal const &x, double sigma);
Eigen::MatrixXd gmm_score_jacobian(GmmPrior const &prior, Signal const &x, double sigma);
Signal gmm_sample(GmmPrior const &prior, Rng &rng, Shape const &shape, bool is_complex = false);

std::size_t block_count(GmmPrior const &prior, Signal const &x);

} // namespace sgpnp
