#pragma once

#include "sgpnp/gmm.hpp"
#include "sgpnp/schedules.hpp"
#include "sgpnp/signal.hpp"

#include <limits>
#include <memory>
#include <string>

namespace sgpnp {

/// Score network abstraction: approximates grad log of the corrupted data law
/// at diffusion time t.
class ScoreModel
{
public:
  virtual ~ScoreModel() = default;
  virtual Signal evaluate(Signal const &x, double t) const = 0;
  virtual NoiseSchedule const &schedule() const = 0;
  virtual std::string name() const = 0;
};

/// Exact score of p_{rho(t)} for a VE schedule.
class GmmVeScore : public ScoreModel
{
public:
  GmmVeScore(GmmPrior prior, NoiseSchedule schedule);
  Signal evaluate(Signal const &x, double t) const override;
  NoiseSchedule const &schedule() const override { return schedule_; }
  std::string name() const override { return "gmm-ve"; }

private:
  GmmPrior prior_;
  NoiseSchedule schedule_;
};

/// Exact score of the law of sqrt(abar_t) (x0 + rho(t) n) for a VP schedule:
/// c^-1 * score_rho(u / c) with c = sqrt(abar_t).
class GmmVpScore : public ScoreModel
{
public:
  GmmVpScore(GmmPrior prior, NoiseSchedule schedule);
  Signal evaluate(Signal const &x, double t) const override;
  NoiseSchedule const &schedule() const override { return schedule_; }
  std::string name() const override { return "gmm-vp"; }

private:
  GmmPrior prior_;
  NoiseSchedule schedule_;
};

class ZeroScore : public ScoreModel
{
public:
  explicit ZeroScore(NoiseSchedule schedule);
  Signal evaluate(Signal const &x, double t) const override;
  NoiseSchedule const &schedule() const override { return schedule_; }
  std::string name() const override { return "zero"; }

private:
  NoiseSchedule schedule_;
};

/// Adds eps * tanh(x) to another model's output: a bounded, smooth model error.
class PerturbedScore : public ScoreModel
{
public:
  PerturbedScore(std::shared_ptr<ScoreModel const> inner, double eps);
  Signal evaluate(Signal const &x, double t) const override;
  NoiseSchedule const &schedule() const override { return inner_->schedule(); }
  std::string name() const override { return inner_->name() + "+perturbed"; }

private:
  std::shared_ptr<ScoreModel const> inner_;
  double eps_;
};

/// x + rho(t)^2 s(x, t).
Signal ve_denoise(ScoreModel const &model, Signal const &x, double t);
/// x + ((1 - abar_t) / sqrt(abar_t)) s(sqrt(abar_t) x, t).
Signal vp_denoise(ScoreModel const &model, Signal const &x, double t);

/// Noise-conditioned denoiser D(x; sigma).
class Denoiser
{
public:
  virtual ~Denoiser() = default;
  virtual Signal denoise(Signal const &x, double sigma) const = 0;
  virtual double sigma_min() const { return 0.0; }
  virtual double sigma_max() const { return std::numeric_limits<double>::infinity(); }
  virtual std::string name() const = 0;
  /// The mixture behind the denoiser when it is exactly MMSE for one.
  virtual GmmPrior const *exact_prior() const { return nullptr; }
};

using DenoiserPtr = std::shared_ptr<Denoiser const>;

class GmmDenoiser : public Denoiser
{
public:
  explicit GmmDenoiser(GmmPrior prior);
  Signal denoise(Signal const &x, double sigma) const override;
  std::string name() const override { return "gmm"; }
  GmmPrior const *exact_prior() const override { return &prior_; }
  GmmPrior const &prior() const { return prior_; }

private:
  GmmPrior prior_;
};

/// Parameter matching: sigma is converted to t* = rho^-1(sigma) and the score
/// model is queried at t*. Sigma outside [rho_min, rho_max] is an error.
class VeAdapter : public Denoiser
{
public:
  explicit VeAdapter(std::shared_ptr<ScoreModel const> model);
  Signal denoise(Signal const &x, double sigma) const override;
  double sigma_min() const override;
  double sigma_max() const override;
  std::string name() const override { return "ve(" + model_->name() + ")"; }

private:
  std::shared_ptr<ScoreModel const> model_;
};

class VpAdapter : public Denoiser
{
public:
  explicit VpAdapter(std::shared_ptr<ScoreModel const> model);
  Signal denoise(Signal const &x, double sigma) const override;
  double sigma_min() const override;
  double sigma_max() const override;
  std::string name() const override { return "vp(" + model_->name() + ")"; }

private:
  std::shared_ptr<ScoreModel const> model_;
};

/// Restricts the noise levels the inner denoiser ever sees to [lo, hi].
class ClampedDenoiser : public Denoiser
{
public:
  ClampedDenoiser(DenoiserPtr inner, double lo, double hi);
  Signal denoise(Signal const &x, double sigma) const override;
  /// Accepts any level; the inner denoiser only ever sees [lo, hi].
  std::string name() const override;
  double clamp(double sigma) const;
  double lo() const { return lo_; }
  double hi() const { return hi_; }

private:
  DenoiserPtr inner_;
  double lo_;
  double hi_;
};

/// Adds a constant offset to every output coordinate (fault injection).
class BiasedDenoiser : public Denoiser
{
public:
  BiasedDenoiser(DenoiserPtr inner, double bias);
  Signal denoise(Signal const &x, double sigma) const override;
  double sigma_min() const override { return inner_->sigma_min(); }
  double sigma_max() const override { return inner_->sigma_max(); }
  std::string name() const override;

private:
  DenoiserPtr inner_;
  double bias_;
};

} // namespace sgpnp
