#pragma once

#include "sgpnp/config.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sgpnp {

/// decouple: sigma_inject = sigma_cond (a) vs the configured plan (b).
/// coverage: full denoiser range (a) vs range clamped to [0, 0.192] (b).
/// detvsstoch: sigma_inject = 0 (a) vs the configured plan (b).
enum class AblationKind
{
  Decouple,
  Coverage,
  DetVsStoch,
};

std::string to_string(AblationKind kind);
/// Throws ConfigError for unknown names.
AblationKind ablation_from_string(std::string const &s);

struct PairedRow
{
  std::size_t trial = 0;
  double psnr_a = 0.0;
  double psnr_b = 0.0;
  std::optional<double> objective_a;
  std::optional<double> objective_b;
  bool escaped_a = false;
  bool escaped_b = false;
};

struct AblationReport
{
  AblationKind kind = AblationKind::DetVsStoch;
  std::string label_a;
  std::string label_b;
  std::vector<PairedRow> rows;
  /// Fraction of pairs where b ends with a strictly lower f_0.
  double win_rate_b = 0.0;
  double mean_objective_a = 0.0;
  double mean_objective_b = 0.0;
  double mean_psnr_a = 0.0;
  double mean_psnr_b = 0.0;
  /// Mean of b - a over pairs.
  double mean_delta_objective = 0.0;
  double mean_delta_psnr = 0.0;
  /// A run escapes when some prior block ends farther than `escape_radius` from its start.
  double escape_radius = 0.0;
  double escape_rate_a = 0.0;
  double escape_rate_b = 0.0;

  nlohmann::json to_json() const;
  void write_csv(std::filesystem::path const &path) const;
};

/// The (a, b) configurations an ablation compares. Throws ConfigError when
/// the base config cannot express the comparison.
std::pair<ExperimentConfig, ExperimentConfig> ablation_variants(AblationKind kind, ExperimentConfig const &base);

/// Runs both variants on the same trial seeds, hence identical ground truth,
/// measurements and noise streams.
AblationReport run_ablation(AblationKind kind, ExperimentConfig const &base);

} // namespace sgpnp
