#pragma once

#include "sgpnp/config.hpp"
#include "sgpnp/denoiser.hpp"
#include "sgpnp/fidelity.hpp"
#include "sgpnp/gmm.hpp"
#include "sgpnp/operators.hpp"
#include "sgpnp/solvers.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace sgpnp {

/// SGPNP_FIXTURE_DIR from the environment, else the source-tree fixtures.
std::filesystem::path fixture_dir();
GmmPrior load_prior_fixture(std::string const &name);

/// Resolved runtime objects for one configuration.
struct Experiment
{
  ExperimentConfig config;
  GmmPrior prior;
  DenoiserPtr denoiser;
  LinearOperator op;
  /// Template solver configuration; per-trial seed and init are filled in by make_trial.
  SolverConfig solver;
};

/// Throws ConfigError for semantic problems found while resolving (prior
/// dimension mismatch, noise levels outside the denoiser's range, ...).
Experiment build_experiment(ExperimentConfig const &config);

struct Trial
{
  std::size_t index = 0;
  Signal ground_truth;
  FidelityProblem problem;
  SolverConfig solver;
  double peak = 1.0;
};

/// Trial t draws its ground truth and measurement noise from child streams
/// (t, 0) and (t, 1) of the config seed; the solver seed is child (t, 2).
Trial make_trial(Experiment const &e, std::size_t t);

struct TrialOutcome
{
  std::size_t index = 0;
  RunRecord record;
  Signal ground_truth;
  double psnr = 0.0;
  double ssim = 0.0;
  std::optional<double> final_objective;
  double wall_ms = 0.0;
};

TrialOutcome run_trial(Experiment const &e, std::size_t t);
/// All config.trials trials, in parallel, ordered by index.
std::vector<TrialOutcome> run_trials(Experiment const &e);

} // namespace sgpnp
