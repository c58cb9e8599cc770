#include "sgpnp/denoiser.hpp"

#include "sgpnp/error.hpp"

#include <algorithm>
#include <cmath>

namespace sgpnp {

GmmVeScore::GmmVeScore(GmmPrior prior, NoiseSchedule schedule)
  : prior_(std::move(prior))
  , schedule_(std::move(schedule))
{
}

Signal GmmVeScore::evaluate(Signal const &x, double t) const
{
  return gmm_smoothed_score(prior_, x, schedule_.rho(t));
}

GmmVpScore::GmmVpScore(GmmPrior prior, NoiseSchedule schedule)
  : prior_(std::move(prior))
  , schedule_(std::move(schedule))
{
  if (schedule_.kind() != ScheduleKind::VariancePreserving) {
    throw DomainError("VP score model needs a VP schedule");
  }
}

Signal GmmVpScore::evaluate(Signal const &x, double t) const
{
  double const c = std::sqrt(schedule_.alpha_bar(t));
  Signal s = gmm_smoothed_score(prior_, scale(1.0 / c, x), schedule_.rho(t));
  s *= 1.0 / c;
  return s;
}

ZeroScore::ZeroScore(NoiseSchedule schedule)
  : schedule_(std::move(schedule))
{
}

Signal ZeroScore::evaluate(Signal const &x, double t) const
{
  schedule_.rho(t);
  return Signal::zeros_like(x);
}

PerturbedScore::PerturbedScore(std::shared_ptr<ScoreModel const> inner, double eps)
  : inner_(std::move(inner))
  , eps_(eps)
{
}

Signal PerturbedScore::evaluate(Signal const &x, double t) const
{
  Signal s = inner_->evaluate(x, t);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] += eps_ * std::tanh(x[i]);
  }
  return s;
}

Signal ve_denoise(ScoreModel const &model, Signal const &x, double t)
{
  double const r = model.schedule().rho(t);
  if (r == 0.0) {
    return x;
  }
  Signal s = model.evaluate(x, t);
  require_same_layout(s, x, "score model output");
  return axpy(r * r, s, x);
}

Signal vp_denoise(ScoreModel const &model, Signal const &x, double t)
{
  double const abar = model.schedule().alpha_bar(t);
  if (!(abar > 0.0) || abar > 1.0) {
    throw DomainError("VP mean factor must lie in (0, 1]");
  }
  if (abar == 1.0) {
    return x;
  }
  double const c = std::sqrt(abar);
  Signal s = model.evaluate(scale(c, x), t);
  require_same_layout(s, x, "score model output");
  return axpy((1.0 - abar) / c, s, x);
}

GmmDenoiser::GmmDenoiser(GmmPrior prior)
  : prior_(std::move(prior))
{
}

Signal GmmDenoiser::denoise(Signal const &x, double sigma) const
{
  if (!(sigma >= 0.0)) {
    throw DomainError("denoiser noise level must be nonnegative");
  }
  return gmm_mmse_denoise(prior_, x, sigma);
}

VeAdapter::VeAdapter(std::shared_ptr<ScoreModel const> model)
  : model_(std::move(model))
{
}

Signal VeAdapter::denoise(Signal const &x, double sigma) const
{
  return ve_denoise(*model_, x, invert_rho(model_->schedule(), sigma));
}

double VeAdapter::sigma_min() const { return model_->schedule().min_rho(); }
double VeAdapter::sigma_max() const { return model_->schedule().max_rho(); }

VpAdapter::VpAdapter(std::shared_ptr<ScoreModel const> model)
  : model_(std::move(model))
{
}

Signal VpAdapter::denoise(Signal const &x, double sigma) const
{
  return vp_denoise(*model_, x, invert_rho(model_->schedule(), sigma));
}

double VpAdapter::sigma_min() const { return model_->schedule().min_rho(); }
double VpAdapter::sigma_max() const { return model_->schedule().max_rho(); }

ClampedDenoiser::ClampedDenoiser(DenoiserPtr inner, double lo, double hi)
  : inner_(std::move(inner))
  , lo_(lo)
  , hi_(hi)
{
  if (!(lo >= 0.0) || !(hi >= lo)) {
    throw DomainError("clamp range must satisfy 0 <= lo <= hi");
  }
}

double ClampedDenoiser::clamp(double sigma) const { return std::clamp(sigma, lo_, hi_); }

Signal ClampedDenoiser::denoise(Signal const &x, double sigma) const { return inner_->denoise(x, clamp(sigma)); }

std::string ClampedDenoiser::name() const
{
  return inner_->name() + "[" + std::to_string(lo_) + "," + std::to_string(hi_) + "]";
}

BiasedDenoiser::BiasedDenoiser(DenoiserPtr inner, double bias)
  : inner_(std::move(inner))
  , bias_(bias)
{
}

Signal BiasedDenoiser::denoise(Signal const &x, double sigma) const
{
  Signal out = inner_->denoise(x, sigma);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] += bias_;
  }
  return out;
}

std::string BiasedDenoiser::name() const { return inner_->name() + "+bias"; }

} // namespace sgpnp
