#pragma once

#include "sgpnp/denoiser.hpp"
#include "sgpnp/fidelity.hpp"
#include "sgpnp/gmm.hpp"
#include "sgpnp/quadrature.hpp"
#include "sgpnp/solvers.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace sgpnp {

/// Smoothed regularizer h_sigma(x) = -E_n[log p_sigma(x + sigma n)] for a
/// block-stacked mixture prior; sigma = 0 gives -log p(x). The estimate's
/// std_error is zero when the rule is deterministic.
struct ScalarEstimate
{
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  bool quadrature = true;
};

ScalarEstimate h_sigma(GmmPrior const &prior, Signal const &x, double sigma, QuadratureSpec const &spec = {});
/// -E_n[score_sigma(x + sigma n)], which equals the expectation of U_sigma.
Estimate grad_h_sigma(GmmPrior const &prior, Signal const &x, double sigma, QuadratureSpec const &spec = {});
/// -E_n[Hessian of log p_sigma at x + sigma n], block diagonal.
Eigen::MatrixXd hess_h_sigma(GmmPrior const &prior, Signal const &x, double sigma, QuadratureSpec const &spec = {});

/// U_sigma(x, n) = sigma^-2 (x - D(x + sigma n; sigma)).
Signal u_sigma(Denoiser const &denoiser, Signal const &x, double sigma, Signal const &n);
/// E_n[U_sigma(x, n)] computed through the denoiser itself.
Estimate expected_u_sigma(Denoiser const &denoiser, Signal const &x, double sigma, QuadratureSpec const &spec = {});
/// w = U_sigma(x, n) - grad h_sigma(x).
Signal w_k(Denoiser const &denoiser, GmmPrior const &prior, Signal const &x, double sigma, Signal const &n,
           QuadratureSpec const &spec = {});

/// f_sigma = g + h_sigma with an optional data term (absent means g = 0).
class SmoothedObjective
{
public:
  SmoothedObjective(GmmPrior prior, std::optional<FidelityProblem> fidelity, double sigma, QuadratureSpec spec = {});

  GmmPrior const &prior() const { return prior_; }
  std::optional<FidelityProblem> const &fidelity() const { return fidelity_; }
  double sigma() const { return sigma_; }
  QuadratureSpec const &spec() const { return spec_; }
  SmoothedObjective with_sigma(double sigma) const;

  double value(Signal const &x) const;
  Signal gradient(Signal const &x) const;
  Eigen::MatrixXd hessian(Signal const &x) const;

private:
  GmmPrior prior_;
  std::optional<FidelityProblem> fidelity_;
  double sigma_;
  QuadratureSpec spec_;
};

enum class CriticalKind
{
  StrictSaddle,
  LocalMin,
  Degenerate,
  NonStationary,
};

std::string to_string(CriticalKind kind);

struct SaddleOptions
{
  double grad_tolerance = 1e-10;
  double eig_tolerance = 1e-8;
  int max_iterations = 100;
};

struct SaddleReport
{
  Signal point;
  double sigma = 0.0;
  double grad_norm = 0.0;
  double lambda_min = 0.0;
  Signal direction; // unit eigenvector of lambda_min
  Eigen::VectorXd eigenvalues;
  CriticalKind kind = CriticalKind::NonStationary;
  int iterations = 0;

  nlohmann::json to_json() const;
};

/// Classifies x against the thresholds of `options`.
SaddleReport classify_point(SmoothedObjective const &objective, Signal const &x, SaddleOptions const &options = {});
/// Newton iteration on grad f_sigma = 0 with backtracking on the gradient
/// norm, then classification. Throws ConvergenceError if the gradient
/// tolerance is not reached.
SaddleReport find_saddle(SmoothedObjective const &objective, Signal const &x_init, SaddleOptions const &options = {});

struct CncReport
{
  double sigma = 0.0;
  std::size_t trials = 0;
  /// Var_n(v^T D(x + sigma n)) with a 95% normal-approximation interval.
  double variance = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double threshold = 0.0;
  bool pass = false;
  /// Var_n(v^T U_sigma) and its bound 0.95 sigma^-2.
  double u_variance = 0.0;
  double u_ci_low = 0.0;
  double u_threshold = 0.0;
  bool u_pass = false;

  nlohmann::json to_json() const;
};

/// Requires a certified strict saddle; the slack is 5% below sigma^2.
CncReport cnc_check(Denoiser const &denoiser, SaddleReport const &saddle, double sigma, std::size_t trials,
                    std::uint64_t seed, double slack = 0.05);

struct EscapeOptions
{
  std::size_t trials = 100;
  /// <= 0 uses half the largest distance between mixture means.
  double basin_radius = 0.0;
  double eps_h = 1e-3;
  double mode_radius = 0.5;
  std::uint64_t seed = 1;
};

struct EscapeReport
{
  std::size_t trials = 0;
  double basin_radius = 0.0;
  double escape_fraction = 0.0;
  /// Fraction of all trials ending within mode_radius of some mixture mean.
  double near_mode_fraction = 0.0;
  /// Fraction of trials that escaped and ended within mode_radius of a mean.
  double escaped_near_mode_fraction = 0.0;
  double max_mode_distance = 0.0;
  /// Largest distance from the saddle of any deterministic-twin iterate.
  double deterministic_max_deviation = 0.0;
  std::vector<double> final_distance;
  std::vector<bool> escaped;

  nlohmann::json to_json() const;
};

/// Runs `cfg` from the saddle point for each trial seed, and its sigma_inject = 0
/// twin. Escape means ending farther than the basin radius with
/// lambda_min(hessian f) >= -eps_h.
EscapeReport escape_experiment(SolverConfig const &cfg, FidelityProblem const &problem, Denoiser const &denoiser,
                               SmoothedObjective const &objective, SaddleReport const &saddle,
                               EscapeOptions const &options = {});

struct AnnealOptions
{
  double inner_tolerance = 1e-6;
  int max_inner_iterations = 500;
  /// Box [lo, hi]^d and points per axis for the gradient-gap grid.
  double grid_lo = -5.0;
  double grid_hi = 5.0;
  std::size_t grid_points = 41;
};

struct AnnealStage
{
  double sigma = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;
  double gradient_gap = 0.0;
  Signal x;
};

struct AnnealReport
{
  std::vector<AnnealStage> stages;
  Signal final;
  double final_grad_f0 = 0.0;
  bool gap_monotone = false;

  nlohmann::json to_json() const;
};

/// sup over the grid of ||grad h_sigma - grad h_0||.
double gradient_gap(GmmPrior const &prior, double sigma, AnnealOptions const &options = {},
                    QuadratureSpec const &spec = {});

/// Warm-started staged minimization of f_sigma over a decreasing sequence.
/// Each stage runs damped Newton (gradient fallback) with Armijo backtracking
/// until ||grad f_sigma|| <= inner_tolerance; throws ConvergenceError otherwise.
AnnealReport anneal_consistency(GmmPrior const &prior, FidelityProblem const &fidelity,
                                std::vector<double> const &sigmas, Signal const &x0,
                                AnnealOptions const &options = {}, QuadratureSpec const &spec = {});

/// Largest empirical trace of Cov(U_sigma) over `points`.
double variance_scan(Denoiser const &denoiser, std::vector<Signal> const &points, double sigma, std::size_t samples,
                     std::uint64_t seed);
/// Largest spectral norm of the Hessian of f_sigma over `points`.
double lipschitz_scan(SmoothedObjective const &objective, std::vector<Signal> const &points);

} // namespace sgpnp
