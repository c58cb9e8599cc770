#include "sgpnp/verify.hpp"

#include "sgpnp/ablation.hpp"
#include "sgpnp/analysis.hpp"
#include "sgpnp/config.hpp"
#include "sgpnp/denoiser.hpp"
#include "sgpnp/error.hpp"
#include "sgpnp/experiment.hpp"
#include "sgpnp/fidelity.hpp"
#include "sgpnp/fixtures.hpp"
#include "sgpnp/gmm.hpp"
#include "sgpnp/grid_search.hpp"
#include "sgpnp/operators.hpp"
#include "sgpnp/quadrature.hpp"
#include "sgpnp/rng.hpp"
#include "sgpnp/schedules.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>

namespace sgpnp {

using nlohmann::json;

bool SuiteReport::pass() const
{
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](CheckResult const &c) { return c.pass; });
}

json SuiteReport::to_json() const
{
  json cs = json::array();
  for (auto const &c : checks) {
    cs.push_back({{"name", c.name}, {"pass", c.pass}, {"details", c.details}});
  }
  return {{"suite", suite}, {"pass", pass()}, {"seconds", seconds}, {"checks", cs}};
}

namespace {

struct Context
{
  VerifyOptions options;
  std::filesystem::path root;

  GmmPrior prior(std::string const &name) const { return GmmPrior::load(root / "priors" / (name + ".json")); }
  ExperimentConfig config(std::string const &rel) const { return load_config(root / rel); }

  DenoiserPtr wrap(DenoiserPtr d) const
  {
    return options.fault != 0.0 ? std::make_shared<BiasedDenoiser>(std::move(d), options.fault) : d;
  }
};

double log_uniform(Rng &rng, double lo, double hi)
{
  return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * rng.uniform());
}

Signal noisy_sample(GmmPrior const &prior, Rng &rng, double sigma)
{
  Signal x = Signal::from_vector(prior.sample(rng), {prior.dim()});
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] += sigma * rng.normal();
  }
  return x;
}

Signal as_signal(Eigen::VectorXd const &v) { return Signal::from_vector(v, {std::size_t(v.size())}); }

// ---------------------------------------------------------------- tweedie

std::vector<CheckResult> suite_tweedie(Context const &ctx)
{
  std::vector<CheckResult> out;
  std::uint64_t seed = 101;
  for (std::string name : {"bimodal-1d", "mixture-2d", "bimodal-16d"}) {
    GmmPrior const prior = ctx.prior(name);
    DenoiserPtr const den = ctx.wrap(std::make_shared<GmmDenoiser>(prior));
    Rng rng(seed++);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      double const sigma = log_uniform(rng, 0.05, 5.0);
      Signal const x = noisy_sample(prior, rng, sigma);
      Signal const d = den->denoise(x, sigma);
      Signal const t = axpy(sigma * sigma, gmm_smoothed_score(prior, x, sigma), x);
      worst = std::max(worst, max_abs_diff(d, t));
    }
    out.push_back({"tweedie/" + name, worst < 1e-10, {{"pairs", 200}, {"max_deviation", worst}, {"tolerance", 1e-10}}});
  }
  return out;
}

// ---------------------------------------------------------------- adapters

std::vector<CheckResult> suite_adapters(Context const &ctx)
{
  GmmPrior const prior = ctx.prior("mixture-2d");
  NoiseSchedule const ve = NoiseSchedule::ve_geometric(0.002, 200.0, 1000);
  NoiseSchedule const vp = NoiseSchedule::vp_linear(1e-4, 0.02, 1000);
  auto const ve_model = std::make_shared<GmmVeScore>(prior, ve);
  auto const vp_model = std::make_shared<GmmVpScore>(prior, vp);
  DenoiserPtr const ve_den = ctx.wrap(std::make_shared<VeAdapter>(ve_model));
  DenoiserPtr const vp_den = ctx.wrap(std::make_shared<VpAdapter>(vp_model));

  Rng rng(202);
  double worst_ve = 0.0, worst_vp = 0.0, worst_direct = 0.0, worst_match = 0.0;
  for (int i = 0; i < 100; ++i) {
    double const sigma = log_uniform(rng, 0.05, 20.0);
    Signal const x = noisy_sample(prior, rng, sigma);
    Signal const ref = gmm_mmse_denoise(prior, x, sigma);
    worst_ve = std::max(worst_ve, max_abs_diff(ve_den->denoise(x, sigma), ref));
    worst_vp = std::max(worst_vp, max_abs_diff(vp_den->denoise(x, sigma), ref));

    // Query the score models directly at the matched times.
    double const t_ve = invert_rho(ve, sigma);
    double const t_vp = invert_rho(vp, sigma);
    worst_match = std::max({worst_match, std::abs(rho(ve, t_ve) - sigma) / sigma, std::abs(rho(vp, t_vp) - sigma) / sigma});
    Signal const ref_ve = gmm_mmse_denoise(prior, x, rho(ve, t_ve));
    Signal const ref_vp = gmm_mmse_denoise(prior, x, rho(vp, t_vp));
    worst_direct = std::max({worst_direct, max_abs_diff(ve_denoise(*ve_model, x, t_ve), ref_ve),
                             max_abs_diff(vp_denoise(*vp_model, x, t_vp), ref_vp)});
  }
  double const tol = 1e-8;
  return {
      {"adapters/ve", worst_ve < tol, {{"inputs", 100}, {"max_deviation", worst_ve}, {"tolerance", tol}}},
      {"adapters/vp", worst_vp < tol, {{"inputs", 100}, {"max_deviation", worst_vp}, {"tolerance", tol}}},
      {"adapters/matched-t", worst_direct < tol && worst_match < 1e-9,
       {{"max_deviation", worst_direct}, {"max_rho_mismatch", worst_match}, {"tolerance", tol}}},
  };
}

// ---------------------------------------------------------------- schedules

CheckResult inversion_check(std::string const &name, NoiseSchedule const &s, std::uint64_t seed)
{
  double const T = double(s.steps());
  Rng rng(seed);
  std::vector<double> ts;
  for (std::size_t k = 1; k <= s.steps(); ++k) {
    ts.push_back(double(k));
  }
  for (int i = 0; i < 2000; ++i) {
    ts.push_back(1.0 + (T - 1.0) * rng.uniform());
  }
  double worst = 0.0;
  for (double t : ts) {
    worst = std::max(worst, std::abs(invert_rho(s, rho(s, t)) - t));
  }
  double worst_rho = 0.0;
  for (int i = 0; i < 2000; ++i) {
    double const sigma = log_uniform(rng, s.min_rho(), s.max_rho());
    worst_rho = std::max(worst_rho, std::abs(rho(s, invert_rho(s, sigma)) - sigma) / sigma);
  }
  return {name, worst <= 1e-6 && worst_rho <= 1e-9,
          {{"points", ts.size()}, {"max_t_error", worst}, {"max_rel_rho_error", worst_rho}, {"tolerance", 1e-6}}};
}

std::vector<CheckResult> suite_schedules(Context const &)
{
  std::vector<CheckResult> out;
  NoiseSchedule const ve = NoiseSchedule::ve_geometric(0.01, 50.0, 100);
  NoiseSchedule const vp = NoiseSchedule::vp_linear(1e-4, 0.02, 1000);
  out.push_back(inversion_check("schedules/ve-geometric-T100", ve, 301));
  out.push_back(inversion_check("schedules/vp-linear-T1000", vp, 302));

  // Independent long-double recursion for the VP table.
  long double abar = 1.0L;
  double worst = 0.0;
  for (std::size_t t = 1; t <= 1000; ++t) {
    long double const beta = 1e-4L + (0.02L - 1e-4L) * (long double)(t - 1) / 999.0L;
    abar *= 1.0L - beta;
    double const want = double(std::sqrt((1.0L - abar) / abar));
    worst = std::max(worst, std::abs(rho(vp, double(t)) - want) / want);
  }
  out.push_back({"schedules/vp-recursion", worst <= 1e-10, {{"max_rel_error", worst}, {"tolerance", 1e-10}}});

  AnnealPlan const plan = log_anneal(1.0, 1e-3, 8);
  double ratio_dev = 0.0;
  double const ratio = std::pow(1e-3, 1.0 / 7.0);
  for (std::size_t k = 1; k < plan.values.size(); ++k) {
    ratio_dev = std::max(ratio_dev, std::abs(plan.values[k] / plan.values[k - 1] - ratio));
  }
  bool const ok = plan.values.size() == 8 && plan.values.front() == 1.0 && plan.values.back() == 1e-3 && ratio_dev < 1e-12;
  out.push_back({"schedules/log-anneal", ok, {{"values", plan.values}, {"max_ratio_deviation", ratio_dev}}});
  return out;
}

// ---------------------------------------------------------------- unbiased

std::vector<CheckResult> suite_unbiased(Context const &ctx)
{
  GmmPrior const prior = ctx.prior("mixture-2d");
  DenoiserPtr const den = ctx.wrap(std::make_shared<GmmDenoiser>(prior));
  std::size_t const d = prior.dim();
  double const sigmas[] = {0.3, 1.0, 3.0};
  QuadratureSpec quad;
  quad.method = ExpectationMethod::Quadrature;
  QuadratureSpec fine = quad;
  fine.order = 48;

  Rng rng(401);
  double worst_u = 0.0, worst_w = 0.0, worst_quad = 0.0;
  std::size_t fails_u = 0, fails_w = 0;
  json points = json::array();
  for (int p = 0; p < 20; ++p) {
    double const sigma = sigmas[p % 3];
    Signal const x = noisy_sample(prior, rng, sigma);
    Eigen::VectorXd const gh = grad_h_sigma(prior, x, sigma, quad).value;
    worst_quad = std::max(worst_quad, (grad_h_sigma(prior, x, sigma, fine).value - gh).cwiseAbs().maxCoeff());

    auto u = [&](Eigen::VectorXd const &n) { return u_sigma(*den, x, sigma, as_signal(n)).vec().eval(); };
    auto w = [&](Eigen::VectorXd const &n) { return (u_sigma(*den, x, sigma, as_signal(n)).vec() - gh).eval(); };
    Estimate const mu = monte_carlo_mean(d, d, u, 100000, 4000 + std::uint64_t(p));
    Estimate const mw = monte_carlo_mean(d, d, w, 100000, 5000 + std::uint64_t(p));
    double zu = 0.0, zw = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      zu = std::max(zu, std::abs(mu.value[Eigen::Index(i)] - gh[Eigen::Index(i)]) / mu.std_error[Eigen::Index(i)]);
      zw = std::max(zw, std::abs(mw.value[Eigen::Index(i)]) / mw.std_error[Eigen::Index(i)]);
    }
    fails_u += zu > 4.0 ? 1 : 0;
    fails_w += zw > 4.0 ? 1 : 0;
    worst_u = std::max(worst_u, zu);
    worst_w = std::max(worst_w, zw);
    points.push_back({{"x", x.values()}, {"sigma", sigma}, {"z_u", zu}, {"z_w", zw}});
  }
  return {
      {"unbiased/quadrature-converged", worst_quad < 1e-6, {{"max_order_difference", worst_quad}}},
      {"unbiased/mean-U", fails_u == 0,
       {{"points", 20}, {"draws", 100000}, {"max_z", worst_u}, {"limit_z", 4.0}, {"per_point", points}}},
      {"unbiased/mean-w", fails_w == 0, {{"points", 20}, {"draws", 100000}, {"max_z", worst_w}, {"limit_z", 4.0}}},
  };
}

// ---------------------------------------------------------------- miyasawa

std::vector<CheckResult> suite_miyasawa(Context const &ctx)
{
  std::vector<CheckResult> out;
  std::uint64_t seed = 501;
  for (std::string name : {"mixture-2d", "bimodal-2d"}) {
    GmmPrior const prior = ctx.prior(name);
    DenoiserPtr const den = ctx.wrap(std::make_shared<GmmDenoiser>(prior));
    std::size_t const d = prior.dim();
    Rng rng(seed++);
    double worst_rel = 0.0, worst_eig = 0.0;
    for (double sigma : {0.3, 1.0, 3.0}) {
      for (int p = 0; p < 20; ++p) {
        Signal const x = noisy_sample(prior, rng, sigma);
        double const h = 1e-4 * std::min(sigma, 1.0);
        Eigen::MatrixXd J(d, d);
        for (std::size_t j = 0; j < d; ++j) {
          Signal xp = x, xm = x;
          xp[j] += h;
          xm[j] -= h;
          J.col(Eigen::Index(j)) = (den->denoise(xp, sigma).vec() - den->denoise(xm, sigma).vec()) / (2.0 * h);
        }
        Eigen::MatrixXd const C = gmm_posterior_cov(prior, x, sigma);
        double const rel = (sigma * sigma * J - C).cwiseAbs().maxCoeff() / C.cwiseAbs().maxCoeff();
        worst_rel = std::max(worst_rel, rel);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (J + J.transpose()));
        worst_eig = std::max(worst_eig, -es.eigenvalues().minCoeff());
      }
    }
    out.push_back({"miyasawa/" + name, worst_rel <= 1e-5,
                   {{"points", 60}, {"sigmas", {0.3, 1.0, 3.0}}, {"max_rel_error", worst_rel}, {"tolerance", 1e-5}}});
    out.push_back({"miyasawa/" + name + "/jacobian-psd", worst_eig <= 1e-6, {{"most_negative_eigenvalue", -worst_eig}}});
  }
  return out;
}

// ---------------------------------------------------------------- cnc

FidelityProblem masked_problem(std::size_t dim, std::vector<std::size_t> const &observed)
{
  Signal m({dim});
  for (auto i : observed) {
    m[i] = 1.0;
  }
  auto const op = LinearOperator::mask(m);
  return FidelityProblem(op, op.zeros_output());
}

std::vector<CheckResult> suite_cnc(Context const &ctx)
{
  std::vector<CheckResult> out;
  struct Case
  {
    std::string name;
    std::vector<double> x_init;
    std::vector<std::size_t> observed;
  };
  std::uint64_t seed = 601;
  for (Case const &c : {Case{"bimodal-1d", {0.05}, {}}, Case{"bimodal-2d", {0.05, 0.02}, {1}}}) {
    GmmPrior const prior = ctx.prior(c.name);
    DenoiserPtr const den = ctx.wrap(std::make_shared<GmmDenoiser>(prior));
    SmoothedObjective const obj(prior, masked_problem(prior.dim(), c.observed), 0.0);
    SaddleReport const saddle = find_saddle(obj, Signal({prior.dim()}, c.x_init));
    out.push_back({"cnc/" + c.name + "/saddle", saddle.kind == CriticalKind::StrictSaddle, saddle.to_json()});
    if (saddle.kind != CriticalKind::StrictSaddle) {
      continue;
    }
    for (double sigma : {0.3, 0.5, 1.0}) {
      CncReport const r = cnc_check(*den, saddle, sigma, 100000, seed++);
      out.push_back({"cnc/" + c.name + "/sigma=" + json(sigma).dump(), r.pass, r.to_json()});
    }
  }
  // A strict minimum must be refused.
  {
    GmmPrior const prior = ctx.prior("gaussian-1d");
    SmoothedObjective const obj(prior, masked_problem(1, {}), 0.0);
    SaddleReport const rep = find_saddle(obj, Signal({1}, std::vector<double>{0.3}));
    bool refused = false;
    try {
      cnc_check(GmmDenoiser(prior), rep, 0.5, 10, 1);
    } catch (DomainError const &) {
      refused = true;
    }
    out.push_back({"cnc/refuses-minimum", refused && rep.kind == CriticalKind::LocalMin, {{"kind", to_string(rep.kind)}}});
  }
  return out;
}

// ---------------------------------------------------------------- escape

std::vector<CheckResult> suite_escape(Context const &ctx)
{
  Experiment const ex = build_experiment(ctx.config("configs/escape-red.json"));
  DenoiserPtr const den = ctx.wrap(ex.denoiser);
  Trial const trial = make_trial(ex, 0);
  SmoothedObjective const obj(ex.prior, trial.problem, 0.0);
  SaddleReport const saddle = find_saddle(obj, Signal({1}, std::vector<double>{0.05}));
  EscapeOptions opt;
  opt.trials = 100;
  opt.basin_radius = 1.5;
  opt.mode_radius = 0.5;
  opt.seed = ex.config.seed;
  EscapeReport const rep = escape_experiment(ex.solver, trial.problem, *den, obj, saddle, opt);
  json d = rep.to_json();
  d.erase("final_distance");
  d.erase("escaped");
  return {
      {"escape/saddle", saddle.kind == CriticalKind::StrictSaddle, saddle.to_json()},
      {"escape/stochastic", rep.escaped_near_mode_fraction >= 0.95, d},
      {"escape/deterministic-twin", rep.deterministic_max_deviation <= 1e-8,
       {{"max_deviation", rep.deterministic_max_deviation}, {"tolerance", 1e-8}}},
  };
}

// ---------------------------------------------------------------- anneal

std::vector<CheckResult> suite_anneal(Context const &ctx)
{
  std::vector<CheckResult> out;
  auto const sig = log_anneal(1.0, 1e-3, 8).values;
  auto identity = [](double y) {
    auto const op = LinearOperator::mask(Signal({1}, std::vector<double>{1.0}));
    return FidelityProblem(op, Signal({1}, std::vector<double>{y}));
  };
  {
    GmmPrior const prior = ctx.prior("bimodal-1d");
    FidelityProblem const fid = identity(2.5);
    AnnealReport const rep = anneal_consistency(prior, fid, sig, Signal({1}, std::vector<double>{0.5}));
    double const g0 = norm2(map_objective_gradient(fid, prior, rep.final));
    json d = rep.to_json();
    d["independent_grad_f0"] = g0;
    out.push_back({"anneal/bimodal-1d", g0 <= 1e-5 && rep.final_grad_f0 <= 1e-5, d});
    out.push_back({"anneal/gap-monotone", rep.gap_monotone, {{"final_gap", rep.stages.back().gradient_gap}}});
  }
  {
    GmmPrior const prior = ctx.prior("gaussian-1d");
    AnnealReport const rep = anneal_consistency(prior, identity(1.0), sig, Signal({1}, std::vector<double>{-1.0}));
    double const err = std::abs(rep.final[0] - 0.5);
    out.push_back({"anneal/gaussian-control", err <= 1e-6, {{"final", rep.final[0]}, {"map", 0.5}, {"error", err}}});
  }
  return out;
}

// ---------------------------------------------------------------- operators

struct ProxTally
{
  double prox_gap = 0.0;
  double stationarity = 0.0;
  double adjoint = 0.0;
  int instances = 0;
};

void prox_instance(LinearOperator const &op, Rng &rng, ProxTally &t)
{
  Signal const x = gaussian(rng, op.input_shape(), op.input_complex());
  Signal const r = gaussian(rng, op.output_shape(), op.output_complex());
  double const lhs = dot(op.apply(x), r);
  double const rhs = dot(x, op.adjoint(r));
  t.adjoint = std::max(t.adjoint, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));

  FidelityProblem const p(op, gaussian(rng, op.output_shape(), op.output_complex()));
  Signal const z = gaussian(rng, op.input_shape(), op.input_complex());
  double const gamma = log_uniform(rng, 0.01, 10.0);
  Signal const closed = p.prox(z, gamma);
  Signal const cg = p.prox_cg(z, gamma, CgOptions{1e-14, 5000});
  t.prox_gap = std::max(t.prox_gap, max_abs_diff(closed, cg));
  Signal const res = (closed - z) + gamma * p.gradient(closed);
  t.stationarity = std::max(t.stationarity, norm2(res) / (1.0 + norm2(z)));
  ++t.instances;
}

std::vector<CheckResult> suite_operators(Context const &)
{
  std::map<std::string, std::function<LinearOperator(Rng &)>> kinds;
  auto dims = [](Rng &rng, std::size_t lo, std::size_t hi) {
    return lo + std::size_t(rng.uniform() * double(hi - lo + 1));
  };
  kinds["mask-real"] = [&](Rng &rng) {
    Shape const s{dims(rng, 4, 12), dims(rng, 4, 12)};
    return LinearOperator::mask(random_mask(s, 0.3 + 0.6 * rng.uniform(), rng));
  };
  kinds["mask-complex"] = [&](Rng &rng) {
    Shape const s{dims(rng, 8, 64)};
    return LinearOperator::mask(random_mask(s, 0.3 + 0.6 * rng.uniform(), rng), true);
  };
  kinds["convolution-gaussian"] = [&](Rng &rng) {
    Shape const s{dims(rng, 6, 16), dims(rng, 6, 16)};
    return LinearOperator::convolution(gaussian_kernel(2 * dims(rng, 1, 2) + 1, 0.5 + 1.5 * rng.uniform()), s);
  };
  kinds["convolution-motion"] = [&](Rng &rng) {
    Shape const s{dims(rng, 6, 16), dims(rng, 6, 16)};
    return LinearOperator::convolution(motion_kernel(2 * dims(rng, 1, 2) + 1, 180.0 * rng.uniform()), s);
  };
  kinds["decimation-1d"] = [&](Rng &rng) {
    std::size_t const f = dims(rng, 2, 4);
    return LinearOperator::decimation(Shape{f * dims(rng, 2, 10)}, f);
  };
  kinds["decimation-2d"] = [&](Rng &rng) {
    std::size_t const f = dims(rng, 2, 3);
    return LinearOperator::decimation(Shape{f * dims(rng, 2, 6), f * dims(rng, 2, 6)}, f);
  };
  kinds["subsampled-frequency"] = [&](Rng &rng) {
    Shape const s{dims(rng, 4, 16), dims(rng, 4, 16)};
    return LinearOperator::subsampled_frequency(frequency_column_mask(s, 2.0 + 4.0 * rng.uniform(), 0.25, rng));
  };

  std::vector<CheckResult> out;
  std::uint64_t seed = 901;
  for (auto const &[name, make] : kinds) {
    Rng rng(seed++);
    ProxTally t;
    for (int i = 0; i < 50; ++i) {
      LinearOperator const op = make(rng);
      if (!op.solve_normal(op.zeros_input(), 1.0)) {
        throw DomainError(name + " has no closed-form prox");
      }
      prox_instance(op, rng, t);
    }
    bool const ok = t.prox_gap <= 1e-8 && t.stationarity <= 1e-8 && t.adjoint <= 1e-12;
    out.push_back({"operators/" + name, ok,
                   {{"instances", t.instances},
                    {"max_prox_vs_cg", t.prox_gap},
                    {"max_stationarity", t.stationarity},
                    {"max_adjoint_error", t.adjoint},
                    {"tolerance", 1e-8}}});
  }
  return out;
}

// ---------------------------------------------------------------- table2 / coverage

std::vector<CheckResult> suite_table2(Context const &ctx)
{
  std::vector<CheckResult> out;
  for (std::string alg : {"admm", "pgm", "hqs"}) {
    ExperimentConfig cfg = ctx.config("configs/masked16-" + alg + ".json");
    cfg.denoiser.bias += ctx.options.fault;
    AblationReport const rep = run_ablation(AblationKind::DetVsStoch, cfg);
    json d = rep.to_json();
    d.erase("rows");
    out.push_back({"table2/" + alg, rep.win_rate_b >= 0.8 && rep.rows.size() == 50, d});
  }
  return out;
}

std::vector<CheckResult> suite_coverage(Context const &ctx)
{
  ExperimentConfig cfg = ctx.config("configs/coverage.json");
  cfg.denoiser.bias += ctx.options.fault;
  AblationReport const rep = run_ablation(AblationKind::Coverage, cfg);
  json d = rep.to_json();
  d.erase("rows");
  return {
      {"coverage/escape-rate", rep.escape_rate_b < rep.escape_rate_a, d},
      {"coverage/objective",
       rep.mean_objective_b > rep.mean_objective_a,
       {{"mean_objective_full", rep.mean_objective_a}, {"mean_objective_clamped", rep.mean_objective_b}}},
  };
}

// ---------------------------------------------------------------- lattice

std::vector<CheckResult> suite_lattice(Context const &ctx)
{
  std::vector<CheckResult> out;
  auto const lat = uniform_lattice(0.01, 5.0, 40);
  double spacing_dev = 0.0;
  double value_dev = 0.0;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    value_dev = std::max(value_dev, std::abs(lat[i] - (0.01 + double(i) * (5.0 - 0.01) / 39.0)));
    if (i > 0) {
      spacing_dev = std::max(spacing_dev, std::abs((lat[i] - lat[i - 1]) - (5.0 - 0.01) / 39.0));
    }
  }
  bool const ok = lat.size() == 40 && lat.front() == 0.01 && lat.back() == 5.0 && spacing_dev < 1e-12 && value_dev < 1e-15;
  out.push_back({"lattice/step-size", ok, {{"values", lat}, {"max_spacing_deviation", spacing_dev}}});

  std::ifstream in(ctx.root / "spaces/sweep-gamma-lattice.json");
  json const sj = json::parse(in);
  GridSpace const space = GridSpace::from_json(sj);
  bool same = space.cells() == 40;
  for (std::size_t i = 0; same && i < 40; ++i) {
    same = space.cell(i).at("solver.gamma").get<double>() == lat[i];
  }
  out.push_back({"lattice/sweep-axis", same, {{"cells", space.cells()}}});

  std::vector<std::filesystem::path> files;
  for (auto const &e : std::filesystem::directory_iterator(ctx.root / "hparams")) {
    if (e.path().extension() == ".json") {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  json failures = json::array();
  for (auto const &f : files) {
    try {
      std::ifstream cin(f);
      json j = json::parse(cin);
      j["solver"]["iterations"] = 5;
      Experiment const ex = build_experiment(parse_config(j, f.parent_path()));
      TrialOutcome const t = run_trial(ex, 0);
      if (t.record.iterations.size() != 6 || !all_finite(t.record.final)) {
        failures.push_back({{"file", f.filename().string()}, {"error", "bad record"}});
      }
    } catch (std::exception const &e) {
      failures.push_back({{"file", f.filename().string()}, {"error", e.what()}});
    }
  }
  out.push_back({"lattice/hparam-dry-run", files.size() == 28 && failures.empty(),
                 {{"configs", files.size()}, {"expected", 28}, {"failures", failures}}});
  return out;
}

// ---------------------------------------------------------------- fixtures

std::vector<CheckResult> suite_fixtures(Context const &ctx)
{
  std::vector<CheckResult> out;
  for (auto const &c : check_all_fixtures(ctx.root)) {
    out.push_back({"fixtures/" + c.name, c.pass, {{"message", c.message}}});
  }
  return out;
}

using SuiteFn = std::vector<CheckResult> (*)(Context const &);

std::vector<std::pair<std::string, SuiteFn>> const &suites()
{
  static std::vector<std::pair<std::string, SuiteFn>> const s = {
      {"tweedie", suite_tweedie},     {"adapters", suite_adapters}, {"schedules", suite_schedules},
      {"unbiased", suite_unbiased},   {"miyasawa", suite_miyasawa}, {"cnc", suite_cnc},
      {"escape", suite_escape},       {"anneal", suite_anneal},     {"operators", suite_operators},
      {"table2", suite_table2},       {"coverage", suite_coverage}, {"lattice", suite_lattice},
      {"fixtures", suite_fixtures},
  };
  return s;
}

} // namespace

std::vector<std::string> const &suite_names()
{
  static std::vector<std::string> const names = [] {
    std::vector<std::string> n;
    for (auto const &s : suites()) {
      n.push_back(s.first);
    }
    return n;
  }();
  return names;
}

SuiteReport run_suite(std::string const &name, VerifyOptions const &options)
{
  for (auto const &[n, fn] : suites()) {
    if (n != name) {
      continue;
    }
    Context ctx{options, options.fixtures.empty() ? fixture_dir() : options.fixtures};
    SuiteReport rep;
    rep.suite = name;
    auto const t0 = std::chrono::steady_clock::now();
    try {
      rep.checks = fn(ctx);
    } catch (std::exception const &e) {
      rep.checks.push_back({name + "/error", false, {{"error", e.what()}}});
    }
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
  }
  throw DomainError("unknown verification suite '" + name + "'");
}

} // namespace sgpnp
