#pragma once

#include "sgpnp/denoiser.hpp"
#include "sgpnp/fidelity.hpp"
#include "sgpnp/gmm.hpp"
#include "sgpnp/schedules.hpp"
#include "sgpnp/signal.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sgpnp {

enum class Algorithm
{
  Admm,
  Pgm,
  Red,
  Hqs,
};

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(std::string const &s);

/// Order of the two PGM half-steps. Listing: the residual x_k - D(x_input) is
/// taken at the pre-prox iterate and subtracted from prox(x_k).
/// GradientThenProx: x_{k+1} = prox(x_k - gamma tau (x_k - D(x_input))).
enum class PgmOrder
{
  Listing,
  GradientThenProx,
};

/// Step parameter given as one constant or one value per iteration.
struct StepSchedule
{
  std::vector<double> values;

  StepSchedule() = default;
  StepSchedule(double v)
    : values{v}
  {
  }
  StepSchedule(std::vector<double> v)
    : values(std::move(v))
  {
  }

  double at(std::size_t k) const { return values.size() == 1 ? values.front() : values.at(k); }
  nlohmann::json to_json() const;
};

struct SolverConfig
{
  Algorithm algorithm = Algorithm::Admm;
  std::size_t iterations = 0;
  StepSchedule gamma = 1.0;
  StepSchedule tau = 1.0;
  /// PGM/RED: use tau_k = (sigma_k^cond)^-2 instead of `tau`.
  bool tau_inverse_sigma2 = false;
  AnnealPlan cond;
  AnnealPlan inject;
  std::uint64_t seed = 0;
  PgmOrder pgm_order = PgmOrder::Listing;
  /// Overrides the default starting point (y, or A* y when shapes differ).
  std::optional<Signal> init;
  bool keep_iterates = false;

  bool stochastic() const { return !inject.all_zero(); }
  double tau_at(std::size_t k) const;
  /// Throws DomainError on inconsistent lengths or nonpositive steps.
  void validate() const;
  nlohmann::json to_json() const;
};

struct IterationRecord
{
  std::size_t k = 0;
  std::uint64_t hash = 0;
  double sigma_cond = 0.0;
  double sigma_inject = 0.0;
  /// ||y - A x_k||^2.
  double data_fit = 0.0;
  /// f_0(x_k) = g(x_k) - log p(x_k) and ||grad f_0(x_k)|| when the prior is known.
  std::optional<double> objective;
  std::optional<double> grad_norm;
  /// ADMM only: ||z_k - x_{k+1}|| and ||x_{k+1} - x_k||.
  std::optional<double> primal_residual;
  std::optional<double> dual_residual;
};

struct RunRecord
{
  Algorithm algorithm = Algorithm::Admm;
  std::uint64_t seed = 0;
  nlohmann::json config;
  /// K + 1 entries, x_0 first.
  std::vector<IterationRecord> iterations;
  std::vector<Signal> iterates;
  Signal final;
  /// Per-iteration wall time; kept out of to_json() so records are reproducible.
  std::vector<double> wall_ms;

  double total_ms() const;
  std::optional<double> final_objective() const;
  nlohmann::json to_json() const;
};

/// f_0(x) = 0.5 ||y - A x||^2 - log p(x).
double map_objective(FidelityProblem const &problem, GmmPrior const &prior, Signal const &x);
Signal map_objective_gradient(FidelityProblem const &problem, GmmPrior const &prior, Signal const &x);

/// `prior` enables objective logging; defaults to denoiser.exact_prior().
RunRecord run_admm(SolverConfig const &cfg, FidelityProblem const &problem, Denoiser const &denoiser,
                   GmmPrior const *prior = nullptr);
RunRecord run_pgm(SolverConfig const &cfg, FidelityProblem const &problem, Denoiser const &denoiser,
                  GmmPrior const *prior = nullptr);
RunRecord run_red(SolverConfig const &cfg, FidelityProblem const &problem, Denoiser const &denoiser,
                  GmmPrior const *prior = nullptr);
RunRecord run_hqs(SolverConfig const &cfg, FidelityProblem const &problem, Denoiser const &denoiser,
                  GmmPrior const *prior = nullptr);
RunRecord run_solver(SolverConfig const &cfg, FidelityProblem const &problem, Denoiser const &denoiser,
                     GmmPrior const *prior = nullptr);

} // namespace sgpnp
