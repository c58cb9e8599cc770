#include "sgpnp/analysis.hpp"

#include "sgpnp/error.hpp"
#include "sgpnp/parallel.hpp"
#include "sgpnp/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace sgpnp {

namespace {

Eigen::VectorXd block_of(Signal const &x, std::size_t b, std::size_t d)
{
  return Eigen::Map<Eigen::VectorXd const>(x.data().data() + b * d, Eigen::Index(d));
}

Signal noise_signal(Signal const &like, Eigen::VectorXd const &n)
{
  Signal s = Signal::zeros_like(like);
  s.vec() = n;
  return s;
}

Eigen::MatrixXd normal_matrix(FidelityProblem const &f)
{
  Signal e = f.op().zeros_input();
  auto const n = Eigen::Index(e.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    e[std::size_t(i)] = 1.0;
    m.col(i) = f.op().adjoint(f.op().apply(e)).vec();
    e[std::size_t(i)] = 0.0;
  }
  return 0.5 * (m + m.transpose());
}

} // namespace

ScalarEstimate h_sigma(GmmPrior const &prior, Signal const &x, double sigma, QuadratureSpec const &spec)
{
  std::size_t const blocks = block_count(prior, x);
  std::size_t const d = prior.dim();
  ScalarEstimate out;
  if (sigma == 0.0) {
    out.value = -gmm_smoothed_logpdf(prior, x, 0.0);
    return out;
  }
  if (!(sigma > 0.0)) {
    throw DomainError("h_sigma needs sigma >= 0");
  }
  double var = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    Eigen::VectorXd const xb = block_of(x, b, d);
    auto const e = gaussian_expectation(
      d, 1,
      [&](Eigen::VectorXd const &n) {
        Eigen::VectorXd v(1);
        v[0] = -prior.logpdf(xb + sigma * n, sigma);
        return v;
      },
      spec);
    out.value += e.value[0];
    var += e.std_error[0] * e.std_error[0];
    out.samples = e.samples;
    out.quadrature = e.quadrature;
  }
  out.std_error = std::sqrt(var);
  return out;
}

Estimate grad_h_sigma(GmmPrior const &prior, Signal const &x, double sigma, QuadratureSpec const &spec)
{
  std::size_t const blocks = block_count(prior, x);
  std::size_t const d = prior.dim();
  Estimate out;
  out.value = Eigen::VectorXd::Zero(Eigen::Index(x.size()));
  out.std_error = Eigen::VectorXd::Zero(Eigen::Index(x.size()));
  if (sigma == 0.0) {
    out.value = -gmm_smoothed_score(prior, x, 0.0).vec();
    out.quadrature = true;
    return out;
  }
  if (!(sigma > 0.0)) {
    throw DomainError("grad_h_sigma needs sigma >= 0");
  }
  for (std::size_t b = 0; b < blocks; ++b) {
    Eigen::VectorXd const xb = block_of(x, b, d);
    auto const e = gaussian_expectation(
      d, d, [&](Eigen::VectorXd const &n) { return Eigen::VectorXd(-prior.score(xb + sigma * n, sigma)); }, spec);
    out.value.segment(Eigen::Index(b * d), Eigen::Index(d)) = e.value;
    out.std_error.segment(Eigen::Index(b * d), Eigen::Index(d)) = e.std_error;
    out.samples = e.samples;
    out.quadrature = e.quadrature;
  }
  return out;
}

Eigen::MatrixXd hess_h_sigma(GmmPrior const &prior, Signal const &x, double sigma, QuadratureSpec const &spec)
{
  std::size_t const blocks = block_count(prior, x);
  auto const d = Eigen::Index(prior.dim());
  if (sigma == 0.0) {
    return -gmm_score_jacobian(prior, x, 0.0);
  }
  if (!(sigma > 0.0)) {
    throw DomainError("hess_h_sigma needs sigma >= 0");
  }
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(Eigen::Index(x.size()), Eigen::Index(x.size()));
  for (std::size_t b = 0; b < blocks; ++b) {
    Eigen::VectorXd const xb = block_of(x, b, prior.dim());
    auto const e = gaussian_expectation(
      prior.dim(), prior.dim() * prior.dim(),
      [&](Eigen::VectorXd const &n) {
        Eigen::MatrixXd const j = -prior.score_jacobian(xb + sigma * n, sigma);
        return Eigen::VectorXd(Eigen::Map<Eigen::VectorXd const>(j.data(), j.size()));
      },
      spec);
    Eigen::MatrixXd const blk = Eigen::Map<Eigen::MatrixXd const>(e.value.data(), d, d);
    h.block(Eigen::Index(b) * d, Eigen::Index(b) * d, d, d) = 0.5 * (blk + blk.transpose());
  }
  return h;
}

Signal u_sigma(Denoiser const &denoiser, Signal const &x, double sigma, Signal const &n)
{
  if (!(sigma > 0.0)) {
    throw DomainError("U_sigma needs sigma > 0");
  }
  require_same_layout(x, n, "U_sigma noise");
  Signal u = x - denoiser.denoise(axpy(sigma, n, x), sigma);
  u *= 1.0 / (sigma * sigma);
  return u;
}

Estimate expected_u_sigma(Denoiser const &denoiser, Signal const &x, double sigma, QuadratureSpec const &spec)
{
  return gaussian_expectation(
    x.size(), x.size(),
    [&](Eigen::VectorXd const &n) { return Eigen::VectorXd(u_sigma(denoiser, x, sigma, noise_signal(x, n)).vec()); },
    spec);
}

Signal w_k(Denoiser const &denoiser, GmmPrior const &prior, Signal const &x, double sigma, Signal const &n,
           QuadratureSpec const &spec)
{
  Signal w = u_sigma(denoiser, x, sigma, n);
  w.vec() -= grad_h_sigma(prior, x, sigma, spec).value;
  return w;
}

SmoothedObjective::SmoothedObjective(GmmPrior prior, std::optional<FidelityProblem> fidelity, double sigma,
                                     QuadratureSpec spec)
  : prior_(std::move(prior))
  , fidelity_(std::move(fidelity))
  , sigma_(sigma)
  , spec_(spec)
{
  if (!(sigma_ >= 0.0)) {
    throw DomainError("smoothing level must be nonnegative");
  }
}

SmoothedObjective SmoothedObjective::with_sigma(double sigma) const
{
  return SmoothedObjective(prior_, fidelity_, sigma, spec_);
}

double SmoothedObjective::value(Signal const &x) const
{
  double v = h_sigma(prior_, x, sigma_, spec_).value;
  if (fidelity_) {
    v += fidelity_->value(x);
  }
  return v;
}

Signal SmoothedObjective::gradient(Signal const &x) const
{
  Signal g = Signal::zeros_like(x);
  g.vec() = grad_h_sigma(prior_, x, sigma_, spec_).value;
  if (fidelity_) {
    g += fidelity_->gradient(x);
  }
  return g;
}

Eigen::MatrixXd SmoothedObjective::hessian(Signal const &x) const
{
  Eigen::MatrixXd h = hess_h_sigma(prior_, x, sigma_, spec_);
  if (fidelity_) {
    h += normal_matrix(*fidelity_);
  }
  return h;
}

std::string to_string(CriticalKind kind)
{
  switch (kind) {
  case CriticalKind::StrictSaddle:
    return "strict-saddle";
  case CriticalKind::LocalMin:
    return "local-min";
  case CriticalKind::Degenerate:
    return "degenerate";
  case CriticalKind::NonStationary:
    return "non-stationary";
  }
  return "unknown";
}

nlohmann::json SaddleReport::to_json() const
{
  return {
    {"point", point.values()},
    {"sigma", sigma},
    {"grad_norm", grad_norm},
    {"lambda_min", lambda_min},
    {"direction", direction.values()},
    {"eigenvalues", std::vector<double>(eigenvalues.data(), eigenvalues.data() + eigenvalues.size())},
    {"classification", to_string(kind)},
    {"iterations", iterations},
  };
}

SaddleReport classify_point(SmoothedObjective const &objective, Signal const &x, SaddleOptions const &options)
{
  SaddleReport r;
  r.point = x;
  r.sigma = objective.sigma();
  r.grad_norm = norm2(objective.gradient(x));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(objective.hessian(x));
  if (eig.info() != Eigen::Success) {
    throw ConvergenceError("Hessian eigendecomposition failed", r.grad_norm);
  }
  r.eigenvalues = eig.eigenvalues();
  r.lambda_min = r.eigenvalues[0];
  r.direction = Signal::zeros_like(x);
  r.direction.vec() = eig.eigenvectors().col(0);
  if (r.grad_norm > options.grad_tolerance) {
    r.kind = CriticalKind::NonStationary;
  } else if (r.lambda_min <= -options.eig_tolerance) {
    r.kind = CriticalKind::StrictSaddle;
  } else if (r.lambda_min >= options.eig_tolerance) {
    r.kind = CriticalKind::LocalMin;
  } else {
    r.kind = CriticalKind::Degenerate;
  }
  return r;
}

SaddleReport find_saddle(SmoothedObjective const &objective, Signal const &x_init, SaddleOptions const &options)
{
  Signal x = x_init;
  Signal g = objective.gradient(x);
  double gn = norm2(g);
  int it = 0;
  for (; it < options.max_iterations && gn > options.grad_tolerance; ++it) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(objective.hessian(x));
    Eigen::VectorXd const c = eig.eigenvectors().transpose() * g.vec();
    double const scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    Eigen::VectorXd step = Eigen::VectorXd::Zero(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      double const lam = eig.eigenvalues()[i];
      if (std::abs(lam) > 1e-12 * scale) {
        step[i] = -c[i] / lam;
      }
    }
    Signal p = Signal::zeros_like(x);
    p.vec() = eig.eigenvectors() * step;
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
      Signal const trial = axpy(t, p, x);
      Signal const gt = objective.gradient(trial);
      double const gtn = norm2(gt);
      if (gtn < gn) {
        x = trial;
        g = gt;
        gn = gtn;
        moved = true;
        break;
      }
    }
    if (!moved) {
      break;
    }
  }
  if (gn > options.grad_tolerance) {
    throw ConvergenceError("critical-point search did not reach the gradient tolerance", gn);
  }
  auto r = classify_point(objective, x, options);
  r.iterations = it;
  return r;
}

nlohmann::json CncReport::to_json() const
{
  return {
    {"sigma", sigma},         {"trials", trials},       {"variance", variance},       {"ci_low", ci_low},
    {"ci_high", ci_high},     {"threshold", threshold}, {"pass", pass},               {"u_variance", u_variance},
    {"u_ci_low", u_ci_low},   {"u_threshold", u_threshold}, {"u_pass", u_pass},
  };
}

CncReport cnc_check(Denoiser const &denoiser, SaddleReport const &saddle, double sigma, std::size_t trials,
                    std::uint64_t seed, double slack)
{
  if (saddle.kind != CriticalKind::StrictSaddle) {
    throw DomainError("curvature check needs a certified strict saddle, got " + to_string(saddle.kind));
  }
  if (!(sigma > 0.0)) {
    throw DomainError("curvature check needs sigma > 0");
  }
  if (std::abs(norm2(saddle.direction) - 1.0) > 1e-8) {
    throw DomainError("degenerate negative-curvature direction");
  }
  Signal const &x = saddle.point;
  Signal const &v = saddle.direction;
  auto const st = monte_carlo_moments(
    x.size(),
    [&](Eigen::VectorXd const &n) {
      Signal input = x;
      input.vec() += sigma * n;
      return dot(v, denoiser.denoise(input, sigma));
    },
    trials, seed);
  CncReport r;
  r.sigma = sigma;
  r.trials = trials;
  r.variance = st.variance;
  double const se = std::sqrt(std::max(0.0, st.fourth_central - st.variance * st.variance) / double(trials));
  r.ci_low = st.variance - 1.96 * se;
  r.ci_high = st.variance + 1.96 * se;
  r.threshold = (1.0 - slack) * sigma * sigma;
  r.pass = r.ci_low >= r.threshold;
  double const s4 = std::pow(sigma, 4);
  r.u_variance = st.variance / s4;
  r.u_ci_low = r.ci_low / s4;
  r.u_threshold = (1.0 - slack) / (sigma * sigma);
  r.u_pass = r.u_ci_low >= r.u_threshold;
  return r;
}

nlohmann::json EscapeReport::to_json() const
{
  std::vector<int> esc(escaped.begin(), escaped.end());
  return {
    {"trials", trials},
    {"basin_radius", basin_radius},
    {"escape_fraction", escape_fraction},
    {"near_mode_fraction", near_mode_fraction},
    {"escaped_near_mode_fraction", escaped_near_mode_fraction},
    {"max_mode_distance", max_mode_distance},
    {"deterministic_max_deviation", deterministic_max_deviation},
    {"final_distance", final_distance},
    {"escaped", esc},
  };
}

namespace {

double mode_distance(GmmPrior const &prior, Signal const &x)
{
  std::size_t const blocks = block_count(prior, x);
  double total = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    Eigen::VectorXd const xb = block_of(x, b, prior.dim());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < prior.components(); ++i) {
      best = std::min(best, (xb - prior.mean(i)).squaredNorm());
    }
    total += best;
  }
  return std::sqrt(total);
}

double default_basin_radius(GmmPrior const &prior)
{
  double far = 0.0;
  for (std::size_t i = 0; i < prior.components(); ++i) {
    for (std::size_t j = i + 1; j < prior.components(); ++j) {
      far = std::max(far, (prior.mean(i) - prior.mean(j)).norm());
    }
  }
  return 0.5 * far;
}

} // namespace

EscapeReport escape_experiment(SolverConfig const &cfg, FidelityProblem const &problem, Denoiser const &denoiser,
                               SmoothedObjective const &objective, SaddleReport const &saddle,
                               EscapeOptions const &options)
{
  EscapeReport rep;
  rep.trials = options.trials;
  rep.basin_radius = options.basin_radius > 0.0 ? options.basin_radius : default_basin_radius(objective.prior());
  rep.final_distance.assign(options.trials, 0.0);
  rep.escaped.assign(options.trials, false);
  std::vector<double> mode_dist(options.trials, 0.0);
  std::vector<double> twin_dev(options.trials, 0.0);
  Rng const master(options.seed);
  parallel_for(options.trials, [&](std::size_t t) {
    SolverConfig c = cfg;
    c.seed = master.child(t).seed();
    c.init = saddle.point;
    c.keep_iterates = false;
    auto const rec = run_solver(c, problem, denoiser, &objective.prior());
    double const dist = norm2(rec.final - saddle.point);
    rep.final_distance[t] = dist;
    mode_dist[t] = mode_distance(objective.prior(), rec.final);
    if (dist > rep.basin_radius) {
      auto const cls = classify_point(objective, rec.final);
      rep.escaped[t] = cls.lambda_min >= -options.eps_h;
    }

    SolverConfig twin = c;
    twin.inject = AnnealPlan::zeros(c.iterations);
    twin.keep_iterates = true;
    auto const trec = run_solver(twin, problem, denoiser, &objective.prior());
    double dev = 0.0;
    for (auto const &xi : trec.iterates) {
      dev = std::max(dev, norm2(xi - saddle.point));
    }
    twin_dev[t] = dev;
  });
  std::size_t esc = 0;
  std::size_t near = 0;
  std::size_t both = 0;
  for (std::size_t t = 0; t < options.trials; ++t) {
    esc += rep.escaped[t] ? 1 : 0;
    near += mode_dist[t] <= options.mode_radius ? 1 : 0;
    both += rep.escaped[t] && mode_dist[t] <= options.mode_radius ? 1 : 0;
    rep.max_mode_distance = std::max(rep.max_mode_distance, mode_dist[t]);
    rep.deterministic_max_deviation = std::max(rep.deterministic_max_deviation, twin_dev[t]);
  }
  rep.escape_fraction = options.trials ? double(esc) / double(options.trials) : 0.0;
  rep.near_mode_fraction = options.trials ? double(near) / double(options.trials) : 0.0;
  rep.escaped_near_mode_fraction = options.trials ? double(both) / double(options.trials) : 0.0;
  return rep;
}

nlohmann::json AnnealReport::to_json() const
{
  nlohmann::json st = nlohmann::json::array();
  for (auto const &s : stages) {
    st.push_back({{"sigma", s.sigma},
                  {"iterations", s.iterations},
                  {"grad_norm", s.grad_norm},
                  {"gradient_gap", s.gradient_gap},
                  {"x", s.x.values()}});
  }
  return {{"stages", st}, {"final", final.values()}, {"final_grad_f0", final_grad_f0}, {"gap_monotone", gap_monotone}};
}

double gradient_gap(GmmPrior const &prior, double sigma, AnnealOptions const &options, QuadratureSpec const &spec)
{
  std::size_t const d = prior.dim();
  std::size_t const m = options.grid_points;
  if (m < 2) {
    throw DomainError("gradient-gap grid needs at least two points per axis");
  }
  std::size_t total = 1;
  for (std::size_t a = 0; a < d; ++a) {
    total *= m;
  }
  std::vector<double> gaps(total, 0.0);
  parallel_for(total, [&](std::size_t p) {
    Signal x(Shape{d});
    std::size_t rem = p;
    for (std::size_t a = d; a-- > 0;) {
      x[a] = options.grid_lo + (options.grid_hi - options.grid_lo) * double(rem % m) / double(m - 1);
      rem /= m;
    }
    Eigen::VectorXd const g = grad_h_sigma(prior, x, sigma, spec).value;
    Eigen::VectorXd const g0 = -prior.score(x.vec(), 0.0);
    gaps[p] = (g - g0).norm();
  });
  return *std::max_element(gaps.begin(), gaps.end());
}

AnnealReport anneal_consistency(GmmPrior const &prior, FidelityProblem const &fidelity,
                                std::vector<double> const &sigmas, Signal const &x0, AnnealOptions const &options,
                                QuadratureSpec const &spec)
{
  if (sigmas.empty()) {
    throw DomainError("annealing needs at least one noise level");
  }
  for (std::size_t i = 1; i < sigmas.size(); ++i) {
    if (!(sigmas[i] < sigmas[i - 1])) {
      throw DomainError("annealing levels must be strictly decreasing");
    }
  }
  if (sigmas.back() > 1e-3) {
    throw DomainError("annealing must end at sigma <= 1e-3");
  }
  AnnealReport rep;
  Signal x = x0;
  for (double sigma : sigmas) {
    SmoothedObjective const obj(prior, fidelity, sigma, spec);
    AnnealStage stage;
    stage.sigma = sigma;
    Signal g = obj.gradient(x);
    double f = obj.value(x);
    int it = 0;
    for (; it < options.max_inner_iterations && norm2(g) > options.inner_tolerance; ++it) {
      Eigen::MatrixXd const h = obj.hessian(x);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
      Signal p = Signal::zeros_like(x);
      if (eig.eigenvalues().minCoeff() > 1e-10) {
        p.vec() = -eig.eigenvectors() *
                  (eig.eigenvectors().transpose() * g.vec()).cwiseQuotient(eig.eigenvalues());
      } else {
        double const L = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
        p.vec() = -g.vec() / L;
      }
      double const slope = dot(g, p);
      double t = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 50; ++ls, t *= 0.5) {
        Signal const trial = axpy(t, p, x);
        double const ft = obj.value(trial);
        if (ft <= f + 1e-4 * t * slope) {
          x = trial;
          f = ft;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        // the decrease is below the resolution of f; accept the full step if it shrinks the gradient
        Signal const trial = axpy(1.0, p, x);
        Signal const gt = obj.gradient(trial);
        if (norm2(gt) >= norm2(g)) {
          break;
        }
        x = trial;
        f = obj.value(x);
        g = gt;
        continue;
      }
      g = obj.gradient(x);
    }
    stage.iterations = it;
    stage.grad_norm = norm2(g);
    if (stage.grad_norm > options.inner_tolerance) {
      throw ConvergenceError("annealing stage sigma = " + std::to_string(sigma) + " did not converge",
                             stage.grad_norm);
    }
    stage.gradient_gap = prior.dim() <= 2 ? gradient_gap(prior, sigma, options, spec) : 0.0;
    stage.x = x;
    rep.stages.push_back(std::move(stage));
  }
  rep.final = x;
  rep.final_grad_f0 = norm2(map_objective_gradient(fidelity, prior, x));
  rep.gap_monotone = true;
  for (std::size_t i = 1; i < rep.stages.size(); ++i) {
    if (rep.stages[i].gradient_gap > rep.stages[i - 1].gradient_gap) {
      rep.gap_monotone = false;
    }
  }
  return rep;
}

double variance_scan(Denoiser const &denoiser, std::vector<Signal> const &points, double sigma, std::size_t samples,
                     std::uint64_t seed)
{
  double vmax = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    Signal const &x = points[i];
    auto const e = monte_carlo_mean(
      x.size(), x.size(),
      [&](Eigen::VectorXd const &n) { return Eigen::VectorXd(u_sigma(denoiser, x, sigma, noise_signal(x, n)).vec()); },
      samples, Rng(seed).child(i).seed());
    double const trace = (e.std_error.array().square() * double(samples)).sum();
    vmax = std::max(vmax, trace);
  }
  return vmax;
}

double lipschitz_scan(SmoothedObjective const &objective, std::vector<Signal> const &points)
{
  double lmax = 0.0;
  for (auto const &x : points) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(objective.hessian(x), Eigen::EigenvaluesOnly);
    lmax = std::max(lmax, eig.eigenvalues().cwiseAbs().maxCoeff());
  }
  return lmax;
}

} // namespace sgpnp
