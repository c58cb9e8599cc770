#include "sgpnp/experiment.hpp"

#include "sgpnp/error.hpp"
#include "sgpnp/metrics.hpp"
#include "sgpnp/parallel.hpp"
#include "sgpnp/rng.hpp"
#include "sgpnp/signal_io.hpp"

#include <algorithm>
#include <cstdlib>

#ifndef SGPNP_FIXTURE_DIR
#define SGPNP_FIXTURE_DIR "fixtures"
#endif

namespace sgpnp {

std::filesystem::path fixture_dir()
{
  if (char const *env = std::getenv("SGPNP_FIXTURE_DIR"); env && *env) {
    return env;
  }
  return SGPNP_FIXTURE_DIR;
}

GmmPrior load_prior_fixture(std::string const &name)
{
  return GmmPrior::load(fixture_dir() / "priors" / (name + ".json"));
}

namespace {

std::filesystem::path resolve(ExperimentConfig const &c, std::string const &p)
{
  std::filesystem::path path(p);
  return path.is_absolute() || c.base_dir.empty() ? path : c.base_dir / path;
}

LinearOperator build_operator(ExperimentConfig const &c)
{
  auto const &o = c.problem.op;
  Shape const shape(c.problem.shape.begin(), c.problem.shape.end());
  bool const cx = c.problem.is_complex;
  std::size_t const n = product(shape);
  auto ones = [&](double v) { return Signal(shape, std::vector<double>(n, v)); };
  try {
    if (o.kind == "identity") {
      return LinearOperator::mask(ones(1.0), cx);
    }
    if (o.kind == "zero") {
      return LinearOperator::mask(ones(0.0), cx);
    }
    if (o.kind == "mask") {
      Signal m = ones(0.0);
      if (o.observed) {
        for (auto i : *o.observed) {
          m[i] = 1.0;
        }
      } else {
        m = Signal(shape, *o.values);
      }
      return LinearOperator::mask(m, cx);
    }
    if (o.kind == "box_mask") {
      return LinearOperator::mask(box_mask(shape, *o.r0, *o.c0, *o.h, *o.w), cx);
    }
    if (o.kind == "random_mask") {
      Rng rng(o.seed.value_or(c.seed));
      return LinearOperator::mask(random_mask(shape, *o.keep, rng), cx);
    }
    if (o.kind == "convolution") {
      Signal const k = *o.kernel == "gaussian" ? gaussian_kernel(*o.size, *o.width) : motion_kernel(*o.size, *o.angle);
      Signal kernel = k;
      if (shape.size() == 1 && k.rank() == 2) {
        throw ConfigError("problem.operator", "2-D kernels need rank-2 signals");
      }
      return LinearOperator::convolution(kernel, shape);
    }
    if (o.kind == "decimation") {
      return LinearOperator::decimation(shape, *o.factor);
    }
    if (o.kind == "subsampled_frequency") {
      Rng rng(o.seed.value_or(c.seed));
      return LinearOperator::subsampled_frequency(frequency_column_mask(shape, *o.acceleration, *o.center_fraction, rng));
    }
  } catch (ConfigError const &) {
    throw;
  } catch (Error const &e) {
    throw ConfigError("problem.operator", e.what());
  }
  throw ConfigError("problem.operator.kind", "unknown operator kind '" + o.kind + "'");
}

GmmPrior build_prior(ExperimentConfig const &c)
{
  try {
    if (c.prior.fixture) {
      return load_prior_fixture(*c.prior.fixture);
    }
    if (c.prior.file) {
      return GmmPrior::load(resolve(c, *c.prior.file));
    }
    return GmmPrior::from_json(*c.prior.inline_prior);
  } catch (Error const &e) {
    throw ConfigError("prior", e.what());
  }
}

std::optional<NoiseSchedule> build_schedule(DenoiserConfig const &d)
{
  if (d.kind == "gmm") {
    return std::nullopt;
  }
  try {
    if (d.schedule) {
      return NoiseSchedule::from_json(*d.schedule);
    }
  } catch (std::exception const &e) {
    throw ConfigError("denoiser.schedule", e.what());
  }
  if (d.kind == "vp") {
    return NoiseSchedule::vp_linear(1e-4, 0.02, 1000);
  }
  return NoiseSchedule::ve_geometric(0.002, 200.0, 1000);
}

DenoiserPtr build_denoiser(ExperimentConfig const &c, GmmPrior const &prior)
{
  auto const &d = c.denoiser;
  DenoiserPtr den;
  if (auto sched = build_schedule(d)) {
    if (d.kind == "vp" && sched->kind() != ScheduleKind::VariancePreserving) {
      throw ConfigError("denoiser.schedule", "the vp denoiser needs a vp schedule");
    }
    if (d.kind == "ve" && sched->kind() != ScheduleKind::VarianceExploding) {
      throw ConfigError("denoiser.schedule", "the ve denoiser needs a ve schedule");
    }
    std::shared_ptr<ScoreModel const> model;
    if (d.kind == "vp") {
      model = std::make_shared<GmmVpScore>(prior, *sched);
    } else {
      model = std::make_shared<GmmVeScore>(prior, *sched);
    }
    if (d.score_perturbation != 0.0) {
      model = std::make_shared<PerturbedScore>(model, d.score_perturbation);
    }
    if (d.kind == "vp") {
      den = std::make_shared<VpAdapter>(model);
    } else {
      den = std::make_shared<VeAdapter>(model);
    }
  } else {
    den = std::make_shared<GmmDenoiser>(prior);
  }
  if (d.clamp) {
    den = std::make_shared<ClampedDenoiser>(den, d.clamp->lo, d.clamp->hi);
  }
  if (d.bias != 0.0) {
    den = std::make_shared<BiasedDenoiser>(den, d.bias);
  }
  return den;
}

} // namespace

Experiment build_experiment(ExperimentConfig const &config)
{
  auto prior = build_prior(config);
  auto op = build_operator(config);
  Signal const probe = op.zeros_input();
  if (probe.size() % prior.dim() != 0) {
    throw ConfigError("prior", "signal of " + std::to_string(probe.size()) + " scalars is not a stack of " +
                                 std::to_string(prior.dim()) + "-dimensional prior blocks");
  }
  auto den = build_denoiser(config, prior);

  auto const &s = config.solver;
  SolverConfig sc;
  sc.algorithm = algorithm_from_string(s.algorithm);
  sc.iterations = s.iterations;
  sc.gamma = StepSchedule(s.gamma);
  if (s.tau) {
    sc.tau = StepSchedule(*s.tau);
  }
  sc.tau_inverse_sigma2 = s.tau_inverse_sigma2;
  sc.cond = make_plan(s.sigma_cond.start, s.sigma_cond.end, s.iterations);
  sc.inject = make_plan(s.sigma_inject.start, s.sigma_inject.end, s.iterations);
  if (config.denoiser.clamp && config.denoiser.clamp->inject) {
    for (double &v : sc.inject.values) {
      if (v != 0.0) {
        v = std::clamp(v, config.denoiser.clamp->lo, config.denoiser.clamp->hi);
      }
    }
  }
  sc.pgm_order = s.pgm_order == "listing" ? PgmOrder::Listing : PgmOrder::GradientThenProx;
  // Noise levels the denoiser would reject are a configuration error, found before any compute.
  for (double v : sc.cond.values) {
    if (v < den->sigma_min() || v > den->sigma_max()) {
      throw ConfigError("solver.sigma_cond", "noise level " + std::to_string(v) + " outside the denoiser range [" +
                                               std::to_string(den->sigma_min()) + ", " +
                                               std::to_string(den->sigma_max()) + "]");
    }
  }
  try {
    sc.validate();
  } catch (DomainError const &e) {
    throw ConfigError("solver", e.what());
  }
  if (!config.init.measurement && config.init.values.size() != probe.size()) {
    throw ConfigError("init.values", "needs " + std::to_string(probe.size()) + " entries");
  }
  if (config.problem.ground_truth.values && config.problem.ground_truth.values->size() != probe.size()) {
    throw ConfigError("problem.ground_truth.values", "needs " + std::to_string(probe.size()) + " entries");
  }
  return Experiment{config, std::move(prior), std::move(den), std::move(op), std::move(sc)};
}

Trial make_trial(Experiment const &e, std::size_t t)
{
  auto const &c = e.config;
  Rng const master(c.seed);
  Shape const shape = e.op.input_shape();
  bool const cx = e.op.input_complex();
  Signal gt;
  auto const &g = c.problem.ground_truth;
  if (g.source == "gmm_sample") {
    Rng rng = master.child(t, 0);
    gt = gmm_sample(e.prior, rng, shape, cx);
  } else if (g.source == "values") {
    gt = Signal(shape, *g.values, cx);
  } else {
    try {
      gt = load_signal(resolve(c, *g.path));
    } catch (Error const &err) {
      throw ConfigError("problem.ground_truth.path", err.what());
    }
    if (gt.shape() != shape || gt.is_complex() != cx) {
      throw ConfigError("problem.ground_truth.path", "ground truth does not match problem.shape/complex");
    }
  }
  Signal y = e.op.apply(gt);
  if (c.problem.eta > 0.0) {
    Rng rng = master.child(t, 1);
    Signal n = gaussian_like(rng, y);
    // Unmeasured entries of mask-type outputs are structural zeros and carry no noise.
    if (e.op.kind() == OperatorKind::Mask || e.op.kind() == OperatorKind::SubsampledFrequency) {
      n = e.op.apply(e.op.adjoint(n));
    }
    y = axpy(c.problem.eta, n, y);
  }
  SolverConfig sc = e.solver;
  sc.seed = master.child(t, 2).seed();
  if (!c.init.measurement) {
    sc.init = Signal(shape, c.init.values, cx);
  }
  double peak = 1.0;
  if (c.problem.peak) {
    peak = *c.problem.peak;
  } else {
    Signal const m = magnitude(gt);
    double const mx = *std::max_element(m.values().begin(), m.values().end());
    peak = mx > 0.0 ? mx : 1.0;
  }
  return Trial{t, std::move(gt), FidelityProblem(e.op, std::move(y), c.problem.eta), std::move(sc), peak};
}

TrialOutcome run_trial(Experiment const &e, std::size_t t)
{
  Trial const trial = make_trial(e, t);
  TrialOutcome out;
  out.index = t;
  out.record = run_solver(trial.solver, trial.problem, *e.denoiser, &e.prior);
  out.ground_truth = trial.ground_truth;
  out.psnr = psnr(out.record.final, trial.ground_truth, trial.peak);
  SsimWindow w;
  w.data_range = trial.peak;
  out.ssim = ssim(out.record.final, trial.ground_truth, w);
  out.final_objective = out.record.final_objective();
  out.wall_ms = out.record.total_ms();
  return out;
}

std::vector<TrialOutcome> run_trials(Experiment const &e)
{
  std::vector<TrialOutcome> out(e.config.trials);
  parallel_for(e.config.trials, [&](std::size_t t) { out[t] = run_trial(e, t); });
  return out;
}

} // namespace sgpnp
