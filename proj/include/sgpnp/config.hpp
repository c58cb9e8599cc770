#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sgpnp {

struct OperatorConfig
{
  std::string kind = "identity"; // identity zero mask box_mask random_mask convolution decimation subsampled_frequency
  std::optional<std::vector<std::size_t>> observed; // mask: observed flat indices
  std::optional<std::vector<double>> values;        // mask: explicit {0,1} entries
  std::optional<std::size_t> r0, c0, h, w;            // box_mask: missing box
  std::optional<double> keep;                         // random_mask
  std::optional<std::uint64_t> seed;                  // random_mask, subsampled_frequency
  std::optional<std::string> kernel;                  // convolution: gaussian | motion
  std::optional<std::size_t> size;                    // convolution kernel size
  std::optional<double> width;                        // gaussian kernel width
  std::optional<double> angle;                        // motion kernel angle, degrees
  std::optional<std::size_t> factor;                  // decimation
  std::optional<double> acceleration;                 // subsampled_frequency
  std::optional<double> center_fraction;              // subsampled_frequency
};

struct GroundTruthConfig
{
  std::string source = "gmm_sample"; // gmm_sample | file | values
  std::optional<std::string> path;
  std::optional<std::vector<double>> values;
};

struct ProblemConfig
{
  std::vector<std::size_t> shape;
  bool is_complex = false;
  OperatorConfig op;
  GroundTruthConfig ground_truth;
  double eta = 0.0;
  /// PSNR peak; defaults to the largest ground-truth magnitude.
  std::optional<double> peak;
};

struct PriorConfig
{
  std::optional<std::string> fixture;
  std::optional<std::string> file;
  std::optional<nlohmann::json> inline_prior;
};

struct ClampConfig
{
  double lo = 0.0;
  double hi = 0.0;
  /// Also cap the injected noise levels at hi.
  bool inject = true;
};

struct DenoiserConfig
{
  std::string kind = "gmm"; // gmm | ve | vp
  std::optional<nlohmann::json> schedule;
  std::optional<ClampConfig> clamp;
  double bias = 0.0;
  double score_perturbation = 0.0;
};

struct PlanConfig
{
  double start = 0.0;
  double end = 0.0;
};

struct SolverSection
{
  std::string algorithm = "admm";
  std::size_t iterations = 0;
  std::vector<double> gamma{1.0};
  std::optional<std::vector<double>> tau;
  bool tau_inverse_sigma2 = false;
  PlanConfig sigma_cond;
  PlanConfig sigma_inject;
  std::string pgm_order = "listing"; // listing | gradient_then_prox
};

struct InitConfig
{
  bool measurement = true;
  std::vector<double> values;
};

struct ExperimentConfig
{
  std::string name;
  std::uint64_t seed = 0;
  std::size_t trials = 1;
  std::optional<std::string> output_dir;
  ProblemConfig problem;
  PriorConfig prior;
  DenoiserConfig denoiser;
  SolverSection solver;
  InitConfig init;
  /// Directory relative paths in the config resolve against.
  std::filesystem::path base_dir;
};

/// Strict parse: unknown keys, wrong types and out-of-range values raise
/// ConfigError naming the offending field path.
ExperimentConfig parse_config(nlohmann::json const &j, std::filesystem::path const &base_dir = {});
ExperimentConfig load_config(std::filesystem::path const &path);
/// Canonical serialization; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(ExperimentConfig const &c);

/// Sets a dotted path (e.g. "solver.gamma") inside a JSON config.
void set_path(nlohmann::json &j, std::string const &dotted, nlohmann::json const &value);

} // namespace sgpnp
