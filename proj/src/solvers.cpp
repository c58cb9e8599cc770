#include "sgpnp/solvers.hpp"

#include "sgpnp/error.hpp"
#include "sgpnp/rng.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace sgpnp {

std::string to_string(Algorithm a)
{
  switch (a) {
  case Algorithm::Admm:
    return "admm";
  case Algorithm::Pgm:
    return "pgm";
  case Algorithm::Red:
    return "red";
  case Algorithm::Hqs:
    return "hqs";
  }
  return "unknown";
}

Algorithm algorithm_from_string(std::string const &s)
{
  if (s == "admm") {
    return Algorithm::Admm;
  }
  if (s == "pgm") {
    return Algorithm::Pgm;
  }
  if (s == "red") {
    return Algorithm::Red;
  }
  if (s == "hqs") {
    return Algorithm::Hqs;
  }
  throw DomainError("unknown algorithm '" + s + "'");
}

nlohmann::json StepSchedule::to_json() const
{
  if (values.size() == 1) {
    return values.front();
  }
  return values;
}

double SolverConfig::tau_at(std::size_t k) const
{
  if (tau_inverse_sigma2) {
    double const s = cond[k];
    return 1.0 / (s * s);
  }
  return tau.at(k);
}

void SolverConfig::validate() const
{
  auto check_steps = [&](StepSchedule const &s, char const *name) {
    if (s.values.size() != 1 && s.values.size() != iterations) {
      throw DomainError(std::string(name) + " must be a constant or have one value per iteration");
    }
    for (double v : s.values) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError(std::string(name) + " values must be positive");
      }
    }
  };
  check_steps(gamma, "gamma");
  if (algorithm == Algorithm::Pgm || algorithm == Algorithm::Red) {
    if (tau_inverse_sigma2) {
      for (double s : cond.values) {
        if (!(s > 0.0)) {
          throw DomainError("tau = sigma^-2 needs positive conditioning levels");
        }
      }
    } else {
      check_steps(tau, "tau");
    }
  }
  if (cond.size() != iterations || inject.size() != iterations) {
    throw DomainError("noise plans must have one value per iteration (K = " + std::to_string(iterations) + ")");
  }
  for (double v : cond.values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw DomainError("conditioning noise levels must be finite and nonnegative");
    }
  }
  for (double v : inject.values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw DomainError("injected noise levels must be finite and nonnegative");
    }
  }
}

namespace {

nlohmann::json plan_json(AnnealPlan const &p)
{
  if (p.size() == 0) {
    return {{"K", 0}};
  }
  return {{"start", p.values.front()}, {"end", p.values.back()}, {"K", p.size()}};
}

std::string hex(std::uint64_t h)
{
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace

nlohmann::json SolverConfig::to_json() const
{
  nlohmann::json j = {
    {"algorithm", to_string(algorithm)},
    {"iterations", iterations},
    {"gamma", gamma.to_json()},
    {"sigma_cond", plan_json(cond)},
    {"sigma_inject", plan_json(inject)},
    {"seed", seed},
  };
  if (algorithm == Algorithm::Pgm || algorithm == Algorithm::Red) {
    j["tau"] = tau_inverse_sigma2 ? nlohmann::json("inv_sigma2") : tau.to_json();
  }
  if (algorithm == Algorithm::Pgm) {
    j["pgm_order"] = pgm_order == PgmOrder::Listing ? "listing" : "gradient_then_prox";
  }
  return j;
}

double RunRecord::total_ms() const { return std::accumulate(wall_ms.begin(), wall_ms.end(), 0.0); }

std::optional<double> RunRecord::final_objective() const
{
  if (iterations.empty()) {
    return std::nullopt;
  }
  return iterations.back().objective;
}

nlohmann::json RunRecord::to_json() const
{
  nlohmann::json its = nlohmann::json::array();
  for (auto const &r : iterations) {
    nlohmann::json e = {
      {"k", r.k},
      {"hash", hex(r.hash)},
      {"sigma_cond", r.sigma_cond},
      {"sigma_inject", r.sigma_inject},
      {"data_fit", r.data_fit},
    };
    if (r.objective) {
      e["objective"] = *r.objective;
    }
    if (r.grad_norm) {
      e["grad_norm"] = *r.grad_norm;
    }
    if (r.primal_residual) {
      e["primal_residual"] = *r.primal_residual;
    }
    if (r.dual_residual) {
      e["dual_residual"] = *r.dual_residual;
    }
    its.push_back(std::move(e));
  }
  return {
    {"algorithm", to_string(algorithm)},
    {"seed", seed},
    {"config", config},
    {"iterations", std::move(its)},
    {"final", {{"shape", final.shape()}, {"complex", final.is_complex()}, {"hash", hex(hash(final))}}},
  };
}

double map_objective(FidelityProblem const &problem, GmmPrior const &prior, Signal const &x)
{
  return problem.value(x) - gmm_smoothed_logpdf(prior, x, 0.0);
}

Signal map_objective_gradient(FidelityProblem const &problem, GmmPrior const &prior, Signal const &x)
{
  return problem.gradient(x) - gmm_smoothed_score(prior, x, 0.0);
}

namespace {

class Driver
{
public:
  Driver(SolverConfig const &cfg, FidelityProblem const &problem, Denoiser const &denoiser, GmmPrior const *prior)
    : cfg_(cfg)
    , problem_(problem)
    , denoiser_(denoiser)
    , prior_(prior ? prior : denoiser.exact_prior())
    , rng_(cfg.seed)
  {
    cfg_.validate();
  }

  Signal start() const
  {
    Signal x0 = cfg_.init ? *cfg_.init : problem_.initial_point();
    if (x0.shape() != problem_.op().input_shape() || x0.is_complex() != problem_.op().input_complex()) {
      throw ShapeError("initial point does not live in the operator input space");
    }
    return x0;
  }

  /// One fresh standard-normal draw per iteration, also when injection is off,
  /// so paired runs with equal seeds share their noise stream.
  Signal draw(Signal const &like) { return gaussian_like(rng_, like); }

  Signal perturb(Signal const &base, Signal const &n, std::size_t k) const
  {
    double const s = cfg_.inject[k];
    return s == 0.0 ? base : axpy(s, n, base);
  }

  Signal denoise(Signal const &x, std::size_t k) const { return denoiser_.denoise(x, cfg_.cond[k]); }

  template <typename Step>
  RunRecord run(Step &&step)
  {
    RunRecord rec;
    rec.algorithm = cfg_.algorithm;
    rec.seed = cfg_.seed;
    rec.config = cfg_.to_json();
    Signal x = start();
    rec.iterations.push_back(record(0, x, 0.0, 0.0));
    if (cfg_.keep_iterates) {
      rec.iterates.push_back(x);
    }
    for (std::size_t k = 0; k < cfg_.iterations; ++k) {
      auto const t0 = std::chrono::steady_clock::now();
      IterationRecord extra;
      Signal next = step(k, x, extra);
      if (!all_finite(next)) {
        throw SolverError("non-finite iterate", k);
      }
      auto entry = record(k + 1, next, cfg_.cond[k], cfg_.inject[k]);
      entry.primal_residual = extra.primal_residual;
      entry.dual_residual = extra.dual_residual;
      rec.iterations.push_back(entry);
      x = std::move(next);
      if (cfg_.keep_iterates) {
        rec.iterates.push_back(x);
      }
      rec.wall_ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    }
    rec.final = std::move(x);
    return rec;
  }

  SolverConfig const &cfg() const { return cfg_; }
  FidelityProblem const &problem() const { return problem_; }

private:
  IterationRecord record(std::size_t k, Signal const &x, double sc, double si) const
  {
    IterationRecord r;
    r.k = k;
    r.hash = hash(x);
    r.sigma_cond = sc;
    r.sigma_inject = si;
    double const fit = norm2(problem_.op().apply(x) - problem_.y());
    r.data_fit = fit * fit;
    if (prior_ && x.size() % prior_->dim() == 0) {
      r.objective = map_objective(problem_, *prior_, x);
      r.grad_norm = norm2(map_objective_gradient(problem_, *prior_, x));
    }
    return r;
  }

  SolverConfig const &cfg_;
  FidelityProblem const &problem_;
  Denoiser const &denoiser_;
  GmmPrior const *prior_;
  Rng rng_;
};

} // namespace

RunRecord run_admm(SolverConfig const &cfg, FidelityProblem const &problem, Denoiser const &denoiser,
                   GmmPrior const *prior)
{
  Driver d(cfg, problem, denoiser, prior);
  Signal s = problem.op().zeros_input();
  return d.run([&](std::size_t k, Signal const &x, IterationRecord &extra) {
    Signal const z = problem.prox(x - s, cfg.gamma.at(k));
    Signal const n = d.draw(z);
    Signal const input = d.perturb(s + z, n, k);
    Signal next = d.denoise(input, k);
    Signal const diff = z - next;
    s += diff;
    extra.primal_residual = norm2(diff);
    extra.dual_residual = norm2(next - x);
    return next;
  });
}

RunRecord run_pgm(SolverConfig const &cfg, FidelityProblem const &problem, Denoiser const &denoiser,
                  GmmPrior const *prior)
{
  Driver d(cfg, problem, denoiser, prior);
  return d.run([&](std::size_t k, Signal const &x, IterationRecord &) {
    Signal const n = d.draw(x);
    Signal const input = d.perturb(x, n, k);
    Signal const grad_h = x - d.denoise(input, k);
    double const step = cfg.gamma.at(k) * cfg.tau_at(k);
    if (cfg.pgm_order == PgmOrder::Listing) {
      Signal const p = problem.prox(x, cfg.gamma.at(k));
      return axpy(-step, grad_h, p);
    }
    return problem.prox(axpy(-step, grad_h, x), cfg.gamma.at(k));
  });
}

RunRecord run_red(SolverConfig const &cfg, FidelityProblem const &problem, Denoiser const &denoiser,
                  GmmPrior const *prior)
{
  Driver d(cfg, problem, denoiser, prior);
  return d.run([&](std::size_t k, Signal const &x, IterationRecord &) {
    Signal const n = d.draw(x);
    Signal const input = d.perturb(x, n, k);
    Signal const grad_g = problem.gradient(x);
    Signal const grad_h = scale(cfg.tau_at(k), x - d.denoise(input, k));
    return axpy(-cfg.gamma.at(k), grad_g + grad_h, x);
  });
}

RunRecord run_hqs(SolverConfig const &cfg, FidelityProblem const &problem, Denoiser const &denoiser,
                  GmmPrior const *prior)
{
  Driver d(cfg, problem, denoiser, prior);
  return d.run([&](std::size_t k, Signal const &x, IterationRecord &) {
    Signal const z = problem.prox(x, cfg.gamma.at(k));
    Signal const n = d.draw(z);
    return d.denoise(d.perturb(z, n, k), k);
  });
}

RunRecord run_solver(SolverConfig const &cfg, FidelityProblem const &problem, Denoiser const &denoiser,
                     GmmPrior const *prior)
{
  switch (cfg.algorithm) {
  case Algorithm::Admm:
    return run_admm(cfg, problem, denoiser, prior);
  case Algorithm::Pgm:
    return run_pgm(cfg, problem, denoiser, prior);
  case Algorithm::Red:
    return run_red(cfg, problem, denoiser, prior);
  case Algorithm::Hqs:
    return run_hqs(cfg, problem, denoiser, prior);
  }
  throw DomainError("unknown algorithm");
}

} // namespace sgpnp
