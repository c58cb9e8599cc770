#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <string>
#include <vector>

namespace sgpnp {

enum class ScheduleKind
{
  VarianceExploding,
  VariancePreserving,
};

/// Effective noise schedule rho(t) of a diffusion model tabulated at
/// t = 1..T and extended to [1, T] by linear interpolation.
///
/// VE: rho(t) = sigma_t. VP: rho(t) = sqrt((1 - abar_t) / abar_t) with
/// abar_t = prod_{s <= t} (1 - beta_s). For continuous t the VP mean factor is
/// abar(t) = 1 / (1 + rho(t)^2), which agrees with the table at integer t.
class NoiseSchedule
{
public:
  static NoiseSchedule ve_geometric(double sigma_min, double sigma_max, std::size_t steps);
  static NoiseSchedule ve_tabulated(std::vector<double> sigmas);
  static NoiseSchedule vp_linear(double beta_start, double beta_end, std::size_t steps);
  static NoiseSchedule vp_tabulated(std::vector<double> betas);

  ScheduleKind kind() const { return kind_; }
  std::size_t steps() const { return rho_.size(); }
  std::vector<double> const &rho_table() const { return rho_; }
  /// VP only: abar_t at integer t.
  std::vector<double> const &alpha_bar_table() const { return alpha_bar_; }

  double rho(double t) const;
  double alpha_bar(double t) const;
  /// Continuous t* in [1, T] with rho(t*) = sigma, by bisection over the
  /// knots and an exact solve inside the bracketing segment.
  double invert(double sigma) const;

  double min_rho() const;
  double max_rho() const;
  bool increasing() const { return increasing_; }

  nlohmann::json to_json() const;
  static NoiseSchedule from_json(nlohmann::json const &j);

private:
  NoiseSchedule(ScheduleKind kind, std::vector<double> rho, std::vector<double> alpha_bar, nlohmann::json spec);

  ScheduleKind kind_;
  std::vector<double> rho_;
  std::vector<double> alpha_bar_;
  bool increasing_ = true;
  nlohmann::json spec_;
};

double rho(NoiseSchedule const &schedule, double t);
double invert_rho(NoiseSchedule const &schedule, double sigma);

/// Per-iteration noise levels sigma_0..sigma_{K-1}.
struct AnnealPlan
{
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t k) const { return values[k]; }
  bool all_zero() const;
  double front() const { return values.empty() ? 0.0 : values.front(); }

  static AnnealPlan zeros(std::size_t K);
  static AnnealPlan constant(double value, std::size_t K);
};

/// sigma_k = start * (end / start)^(k / (K - 1)).
AnnealPlan log_anneal(double sigma_start, double sigma_end, std::size_t K);

inline constexpr double kAnnealFloor = 1e-6;

/// Plan used by configurations: start == 0 disables the schedule entirely,
/// end == 0 is replaced by kAnnealFloor, K < 2 yields a constant plan.
AnnealPlan make_plan(double start, double end, std::size_t K);

} // namespace sgpnp
