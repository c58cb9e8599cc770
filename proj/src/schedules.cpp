#include "sgpnp/schedules.hpp"

#include "sgpnp/error.hpp"

#include <algorithm>
#include <cmath>

namespace sgpnp {

NoiseSchedule::NoiseSchedule(ScheduleKind kind, std::vector<double> rho, std::vector<double> alpha_bar,
                             nlohmann::json spec)
  : kind_(kind)
  , rho_(std::move(rho))
  , alpha_bar_(std::move(alpha_bar))
  , spec_(std::move(spec))
{
  if (rho_.size() < 2) {
    throw DomainError("noise schedule needs at least two steps");
  }
  increasing_ = rho_[1] > rho_[0];
  for (std::size_t i = 1; i < rho_.size(); ++i) {
    bool const ok = increasing_ ? rho_[i] > rho_[i - 1] : rho_[i] < rho_[i - 1];
    if (!ok || !std::isfinite(rho_[i])) {
      throw DomainError("noise schedule must be strictly monotone (violated at t = " + std::to_string(i + 1) + ")");
    }
  }
  if (rho_.front() < 0.0 || rho_.back() < 0.0) {
    throw DomainError("noise schedule values must be nonnegative");
  }
}

NoiseSchedule NoiseSchedule::ve_geometric(double sigma_min, double sigma_max, std::size_t steps)
{
  if (!(sigma_min > 0.0) || !(sigma_max > sigma_min) || steps < 2) {
    throw DomainError("geometric VE schedule needs 0 < sigma_min < sigma_max and T >= 2");
  }
  std::vector<double> rho(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    rho[t] = sigma_min * std::pow(sigma_max / sigma_min, double(t) / double(steps - 1));
  }
  rho.back() = sigma_max;
  return NoiseSchedule(ScheduleKind::VarianceExploding, std::move(rho), {},
                       {{"kind", "ve"}, {"sigma_min", sigma_min}, {"sigma_max", sigma_max}, {"T", steps}});
}

NoiseSchedule NoiseSchedule::ve_tabulated(std::vector<double> sigmas)
{
  nlohmann::json spec = {{"kind", "ve"}, {"sigmas", sigmas}};
  return NoiseSchedule(ScheduleKind::VarianceExploding, std::move(sigmas), {}, std::move(spec));
}

NoiseSchedule NoiseSchedule::vp_tabulated(std::vector<double> betas)
{
  std::vector<double> abar(betas.size());
  std::vector<double> rho(betas.size());
  double prod = 1.0;
  for (std::size_t t = 0; t < betas.size(); ++t) {
    if (!(betas[t] > 0.0) || !(betas[t] < 1.0)) {
      throw DomainError("VP betas must lie in (0, 1)");
    }
    prod *= 1.0 - betas[t];
    abar[t] = prod;
    rho[t] = std::sqrt((1.0 - prod) / prod);
  }
  nlohmann::json spec = {{"kind", "vp"}, {"betas", betas}};
  return NoiseSchedule(ScheduleKind::VariancePreserving, std::move(rho), std::move(abar), std::move(spec));
}

NoiseSchedule NoiseSchedule::vp_linear(double beta_start, double beta_end, std::size_t steps)
{
  if (steps < 2) {
    throw DomainError("VP schedule needs T >= 2");
  }
  std::vector<double> betas(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    betas[t] = beta_start + (beta_end - beta_start) * double(t) / double(steps - 1);
  }
  auto s = vp_tabulated(std::move(betas));
  s.spec_ = {{"kind", "vp"}, {"beta_start", beta_start}, {"beta_end", beta_end}, {"T", steps}};
  return s;
}

double NoiseSchedule::rho(double t) const
{
  double const T = double(rho_.size());
  if (!(t >= 1.0 && t <= T)) {
    throw DomainError("schedule time " + std::to_string(t) + " outside [1, " + std::to_string(rho_.size()) + "]");
  }
  auto const i = std::min(std::size_t(t) - 1, rho_.size() - 2);
  double const frac = t - double(i + 1);
  if (frac == 0.0) {
    return rho_[i];
  }
  if (frac == 1.0) {
    return rho_[i + 1];
  }
  return rho_[i] + frac * (rho_[i + 1] - rho_[i]);
}

double NoiseSchedule::alpha_bar(double t) const
{
  if (kind_ == ScheduleKind::VarianceExploding) {
    return 1.0;
  }
  double const tr = std::round(t);
  if (tr == t && t >= 1.0 && t <= double(alpha_bar_.size())) {
    return alpha_bar_[std::size_t(t) - 1];
  }
  double const r = rho(t);
  return 1.0 / (1.0 + r * r);
}

double NoiseSchedule::min_rho() const { return increasing_ ? rho_.front() : rho_.back(); }
double NoiseSchedule::max_rho() const { return increasing_ ? rho_.back() : rho_.front(); }

double NoiseSchedule::invert(double sigma) const
{
  if (!(sigma >= min_rho() && sigma <= max_rho())) {
    throw DomainError("noise level " + std::to_string(sigma) + " outside schedule range [" +
                      std::to_string(min_rho()) + ", " + std::to_string(max_rho()) + "]");
  }
  // bisection over knot indices for the bracketing segment [lo, lo+1]
  std::size_t lo = 0;
  std::size_t hi = rho_.size() - 1;
  auto below = [&](std::size_t i) { return increasing_ ? rho_[i] <= sigma : rho_[i] >= sigma; };
  while (hi - lo > 1) {
    std::size_t const mid = lo + (hi - lo) / 2;
    if (below(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (rho_[lo] == sigma) {
    return double(lo + 1);
  }
  if (rho_[hi] == sigma) {
    return double(hi + 1);
  }
  double const frac = (sigma - rho_[lo]) / (rho_[hi] - rho_[lo]);
  return double(lo + 1) + std::clamp(frac, 0.0, 1.0);
}

nlohmann::json NoiseSchedule::to_json() const { return spec_; }

NoiseSchedule NoiseSchedule::from_json(nlohmann::json const &j)
{
  auto const kind = j.at("kind").get<std::string>();
  if (kind == "ve") {
    if (j.contains("sigmas")) {
      return ve_tabulated(j.at("sigmas").get<std::vector<double>>());
    }
    return ve_geometric(j.at("sigma_min").get<double>(), j.at("sigma_max").get<double>(), j.at("T").get<std::size_t>());
  }
  if (kind == "vp") {
    if (j.contains("betas")) {
      return vp_tabulated(j.at("betas").get<std::vector<double>>());
    }
    return vp_linear(j.at("beta_start").get<double>(), j.at("beta_end").get<double>(), j.at("T").get<std::size_t>());
  }
  throw DomainError("unknown schedule kind '" + kind + "'");
}

double rho(NoiseSchedule const &schedule, double t) { return schedule.rho(t); }
double invert_rho(NoiseSchedule const &schedule, double sigma) { return schedule.invert(sigma); }

bool AnnealPlan::all_zero() const
{
  return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

AnnealPlan AnnealPlan::zeros(std::size_t K) { return {std::vector<double>(K, 0.0)}; }
AnnealPlan AnnealPlan::constant(double value, std::size_t K) { return {std::vector<double>(K, value)}; }

AnnealPlan log_anneal(double sigma_start, double sigma_end, std::size_t K)
{
  if (!(sigma_start > 0.0) || !(sigma_end > 0.0)) {
    throw DomainError("logarithmic annealing needs positive endpoints");
  }
  if (sigma_end > sigma_start) {
    throw DomainError("logarithmic annealing needs sigma_start >= sigma_end");
  }
  if (K < 2) {
    throw DomainError("logarithmic annealing needs K >= 2");
  }
  AnnealPlan plan;
  plan.values.resize(K);
  double const ratio = sigma_end / sigma_start;
  for (std::size_t k = 0; k < K; ++k) {
    plan.values[k] = sigma_start * std::pow(ratio, double(k) / double(K - 1));
  }
  plan.values.front() = sigma_start;
  plan.values.back() = sigma_end;
  return plan;
}

AnnealPlan make_plan(double start, double end, std::size_t K)
{
  if (start < 0.0 || end < 0.0) {
    throw DomainError("noise plan endpoints must be nonnegative");
  }
  if (start == 0.0) {
    return AnnealPlan::zeros(K);
  }
  if (K < 2) {
    return AnnealPlan::constant(start, K);
  }
  return log_anneal(start, std::max(end, kAnnealFloor), K);
}

} // namespace sgpnp
