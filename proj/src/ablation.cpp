#include "sgpnp/ablation.hpp"

#include "sgpnp/error.hpp"
#include "sgpnp/experiment.hpp"
#include "sgpnp/metrics.hpp"
#include "sgpnp/parallel.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace sgpnp {

std::string to_string(AblationKind kind)
{
  switch (kind) {
  case AblationKind::Decouple:
    return "decouple";
  case AblationKind::Coverage:
    return "coverage";
  case AblationKind::DetVsStoch:
    return "detvsstoch";
  }
  return "unknown";
}

AblationKind ablation_from_string(std::string const &s)
{
  if (s == "decouple") {
    return AblationKind::Decouple;
  }
  if (s == "coverage") {
    return AblationKind::Coverage;
  }
  if (s == "detvsstoch") {
    return AblationKind::DetVsStoch;
  }
  throw ConfigError("ablation", "unknown ablation '" + s + "' (decouple, coverage, detvsstoch)");
}

std::pair<ExperimentConfig, ExperimentConfig> ablation_variants(AblationKind kind, ExperimentConfig const &base)
{
  ExperimentConfig a = base;
  ExperimentConfig b = base;
  switch (kind) {
  case AblationKind::DetVsStoch:
    if (!(base.solver.sigma_inject.start > 0.0)) {
      throw ConfigError("solver.sigma_inject.start", "detvsstoch needs a positive injection level");
    }
    a.solver.sigma_inject = PlanConfig{0.0, 0.0};
    break;
  case AblationKind::Decouple:
    a.solver.sigma_inject = base.solver.sigma_cond;
    break;
  case AblationKind::Coverage:
    a.denoiser.clamp.reset();
    if (!b.denoiser.clamp) {
      b.denoiser.clamp = ClampConfig{0.0, 0.192, true};
    }
    break;
  }
  return {a, b};
}

namespace {

double escape_radius(GmmPrior const &prior)
{
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < prior.components(); ++i) {
    for (std::size_t j = i + 1; j < prior.components(); ++j) {
      best = std::min(best, (prior.mean(i) - prior.mean(j)).norm());
    }
  }
  return std::isfinite(best) ? 0.5 * best : 1.0;
}

bool escaped(Signal const &x0, Signal const &x, std::size_t d, double radius)
{
  for (std::size_t start = 0; start + d <= x.size(); start += d) {
    double s = 0.0;
    for (std::size_t i = start; i < start + d; ++i) {
      double const diff = x[i] - x0[i];
      s += diff * diff;
    }
    if (std::sqrt(s) > radius) {
      return true;
    }
  }
  return false;
}

struct Run
{
  double psnr = 0.0;
  std::optional<double> objective;
  bool escaped = false;
};

Run run_one(Experiment const &e, std::size_t t, double radius)
{
  Trial const trial = make_trial(e, t);
  Signal const x0 = trial.solver.init ? *trial.solver.init : trial.problem.initial_point();
  auto const rec = run_solver(trial.solver, trial.problem, *e.denoiser, &e.prior);
  Run r;
  r.psnr = psnr(rec.final, trial.ground_truth, trial.peak);
  r.objective = rec.final_objective();
  r.escaped = escaped(x0, rec.final, e.prior.dim(), radius);
  return r;
}

double mean(std::vector<double> const &v)
{
  double s = 0.0;
  for (double x : v) {
    s += x;
  }
  return v.empty() ? 0.0 : s / double(v.size());
}

} // namespace

AblationReport run_ablation(AblationKind kind, ExperimentConfig const &base)
{
  auto const [ca, cb] = ablation_variants(kind, base);
  Experiment const ea = build_experiment(ca);
  Experiment const eb = build_experiment(cb);

  AblationReport rep;
  rep.kind = kind;
  switch (kind) {
  case AblationKind::DetVsStoch:
    rep.label_a = "deterministic";
    rep.label_b = "stochastic";
    break;
  case AblationKind::Decouple:
    rep.label_a = "matched";
    rep.label_b = "decoupled";
    break;
  case AblationKind::Coverage:
    rep.label_a = "full-range";
    rep.label_b = "clamped";
    break;
  }
  rep.escape_radius = escape_radius(ea.prior);

  std::size_t const n = base.trials;
  rep.rows.resize(n);
  parallel_for(n, [&](std::size_t t) {
    Run const a = run_one(ea, t, rep.escape_radius);
    Run const b = run_one(eb, t, rep.escape_radius);
    rep.rows[t] = PairedRow{t, a.psnr, b.psnr, a.objective, b.objective, a.escaped, b.escaped};
  });

  std::vector<double> oa, ob, pa, pb, dobj, dpsnr;
  std::size_t wins = 0, esc_a = 0, esc_b = 0;
  for (auto const &r : rep.rows) {
    if (r.objective_a && r.objective_b) {
      oa.push_back(*r.objective_a);
      ob.push_back(*r.objective_b);
      dobj.push_back(*r.objective_b - *r.objective_a);
      wins += *r.objective_b < *r.objective_a ? 1 : 0;
    }
    pa.push_back(r.psnr_a);
    pb.push_back(r.psnr_b);
    dpsnr.push_back(r.psnr_b - r.psnr_a);
    esc_a += r.escaped_a ? 1 : 0;
    esc_b += r.escaped_b ? 1 : 0;
  }
  rep.win_rate_b = dobj.empty() ? 0.0 : double(wins) / double(dobj.size());
  rep.mean_objective_a = mean(oa);
  rep.mean_objective_b = mean(ob);
  rep.mean_delta_objective = mean(dobj);
  rep.mean_psnr_a = mean(pa);
  rep.mean_psnr_b = mean(pb);
  rep.mean_delta_psnr = mean(dpsnr);
  rep.escape_rate_a = n ? double(esc_a) / double(n) : 0.0;
  rep.escape_rate_b = n ? double(esc_b) / double(n) : 0.0;
  return rep;
}

nlohmann::json AblationReport::to_json() const
{
  nlohmann::json rows_j = nlohmann::json::array();
  for (auto const &r : rows) {
    rows_j.push_back({{"trial", r.trial},
                      {"psnr_" + label_a, r.psnr_a},
                      {"psnr_" + label_b, r.psnr_b},
                      {"objective_" + label_a, r.objective_a ? nlohmann::json(*r.objective_a) : nlohmann::json()},
                      {"objective_" + label_b, r.objective_b ? nlohmann::json(*r.objective_b) : nlohmann::json()},
                      {"escaped_" + label_a, r.escaped_a},
                      {"escaped_" + label_b, r.escaped_b}});
  }
  return {{"ablation", to_string(kind)},
          {"a", label_a},
          {"b", label_b},
          {"pairs", rows.size()},
          {"win_rate_b", win_rate_b},
          {"mean_objective_a", mean_objective_a},
          {"mean_objective_b", mean_objective_b},
          {"mean_delta_objective", mean_delta_objective},
          {"mean_psnr_a", mean_psnr_a},
          {"mean_psnr_b", mean_psnr_b},
          {"mean_delta_psnr", mean_delta_psnr},
          {"escape_radius", escape_radius},
          {"escape_rate_a", escape_rate_a},
          {"escape_rate_b", escape_rate_b},
          {"rows", rows_j}};
}

void AblationReport::write_csv(std::filesystem::path const &path) const
{
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out.precision(17);
  out << "trial,psnr_" << label_a << ",psnr_" << label_b << ",objective_" << label_a << ",objective_" << label_b
      << ",escaped_" << label_a << ",escaped_" << label_b << "\n";
  for (auto const &r : rows) {
    out << r.trial << "," << r.psnr_a << "," << r.psnr_b << ",";
    if (r.objective_a) {
      out << *r.objective_a;
    }
    out << ",";
    if (r.objective_b) {
      out << *r.objective_b;
    }
    out << "," << int(r.escaped_a) << "," << int(r.escaped_b) << "\n";
  }
}

} // namespace sgpnp
