#include "sgpnp/commands.hpp"

#include "sgpnp/ablation.hpp"
#include "sgpnp/config.hpp"
#include "sgpnp/error.hpp"
#include "sgpnp/experiment.hpp"
#include "sgpnp/fixtures.hpp"
#include "sgpnp/grid_search.hpp"
#include "sgpnp/signal_io.hpp"
#include "sgpnp/verify.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace sgpnp {

using nlohmann::json;

namespace {

std::string num(double v)
{
  if (std::isnan(v)) {
    return "nan";
  }
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  return json(v).dump();
}

void write_text(std::filesystem::path const &path, std::string const &text)
{
  auto const tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << text;
    if (!out) {
      throw IoError("cannot write " + path.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

// Runs `body`, mapping library errors to exit codes.
template <class F>
int guarded(std::ostream &log, F &&body)
{
  try {
    return body();
  } catch (ConfigError const &e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (std::exception const &e) {
    log << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

std::filesystem::path output_dir(std::filesystem::path const &given, ExperimentConfig const &c)
{
  if (!given.empty()) {
    return given;
  }
  if (c.output_dir) {
    std::filesystem::path p(*c.output_dir);
    return p.is_absolute() ? p : c.base_dir / p;
  }
  throw ConfigError("output_dir", "no output directory: pass -o or set output_dir");
}

std::string tau_field(SolverSection const &s)
{
  if (s.tau_inverse_sigma2) {
    return "inv_sigma2";
  }
  return s.tau ? num(s.tau->at(0)) : "";
}

} // namespace

int cmd_run(std::filesystem::path const &config, std::filesystem::path const &out_dir, std::ostream &log)
{
  return guarded(log, [&] {
    ExperimentConfig const cfg = load_config(config);
    Experiment const ex = build_experiment(cfg);
    auto const out = output_dir(out_dir, cfg);
    std::filesystem::create_directories(out);

    auto const outcomes = run_trials(ex);

    json record;
    if (outcomes.size() == 1) {
      record = outcomes[0].record.to_json();
    } else {
      record = {{"trials", json::array()}};
      for (auto const &o : outcomes) {
        record["trials"].push_back(o.record.to_json());
      }
    }
    write_text(out / "run_record.json", record.dump(2) + "\n");

    if (outcomes.size() == 1) {
      save_signal(out / "final.sgp", outcomes[0].record.final);
    } else {
      Signal const &first = outcomes[0].record.final;
      Shape shape{outcomes.size()};
      shape.insert(shape.end(), first.shape().begin(), first.shape().end());
      std::vector<double> data;
      for (auto const &o : outcomes) {
        data.insert(data.end(), o.record.final.values().begin(), o.record.final.values().end());
      }
      save_signal(out / "final.sgp", Signal(shape, data, first.is_complex()));
    }

    std::ostringstream csv;
    csv << "run_id,algorithm,stochastic,K,gamma,tau,sigma_cond_0,sigma_inject_0,seed,psnr,ssim,final_objective,wall_ms\n";
    std::string const stem = cfg.name.empty() ? "run" : cfg.name;
    for (auto const &o : outcomes) {
      auto const &sc = o.record;
      csv << stem << "-" << o.index << "," << to_string(ex.solver.algorithm) << ","
          << (ex.solver.stochastic() ? 1 : 0) << "," << ex.solver.iterations << "," << num(cfg.solver.gamma.at(0))
          << "," << tau_field(cfg.solver) << "," << num(ex.solver.cond.values.at(0)) << ","
          << num(ex.solver.inject.values.at(0)) << "," << sc.seed << "," << num(o.psnr) << "," << num(o.ssim) << ","
          << (o.final_objective ? num(*o.final_objective) : "") << "," << num(o.wall_ms) << "\n";
      log << stem << "-" << o.index << ": psnr " << num(o.psnr) << " dB, ssim " << num(o.ssim);
      if (o.final_objective) {
        log << ", f0 " << num(*o.final_objective);
      }
      log << "\n";
    }
    write_text(out / "metrics.csv", csv.str());
    log << "wrote " << (out / "run_record.json").string() << ", final.sgp, metrics.csv\n";
    return int(kExitOk);
  });
}

int cmd_verify(std::vector<std::string> const &suites, double fault, std::optional<std::filesystem::path> const &report,
               std::ostream &log)
{
  std::vector<std::string> names;
  for (auto const &s : suites) {
    if (s == "all") {
      names.insert(names.end(), suite_names().begin(), suite_names().end());
    } else if (std::find(suite_names().begin(), suite_names().end(), s) != suite_names().end()) {
      names.push_back(s);
    } else {
      log << "unknown suite '" << s << "'; known: all";
      for (auto const &n : suite_names()) {
        log << " " << n;
      }
      log << "\n";
      return kExitConfig;
    }
  }
  if (names.empty()) {
    log << "no suite selected\n";
    return kExitConfig;
  }
  return guarded(log, [&] {
    VerifyOptions opt;
    opt.fault = fault;
    bool ok = true;
    json all = json::array();
    for (auto const &n : names) {
      SuiteReport const rep = run_suite(n, opt);
      for (auto const &c : rep.checks) {
        log << (c.pass ? "PASS " : "FAIL ") << c.name << "\n";
      }
      log << "suite " << n << ": " << (rep.pass() ? "PASS" : "FAIL") << " (" << num(rep.seconds) << " s)\n";
      ok = ok && rep.pass();
      all.push_back(rep.to_json());
    }
    if (report) {
      if (report->has_parent_path()) {
        std::filesystem::create_directories(report->parent_path());
      }
      write_text(*report, json{{"pass", ok}, {"suites", all}}.dump(2) + "\n");
    }
    return int(ok ? kExitOk : kExitVerify);
  });
}

int cmd_sweep(std::filesystem::path const &space_path, std::filesystem::path const &out_dir, std::ostream &log)
{
  return guarded(log, [&] {
    std::ifstream in(space_path);
    if (!in) {
      throw ConfigError(space_path.string(), "cannot open space file");
    }
    json space_j;
    try {
      in >> space_j;
    } catch (json::exception const &e) {
      throw ConfigError(space_path.string(), std::string("invalid JSON: ") + e.what());
    }
    auto const dir = space_path.parent_path();
    for (auto const &[k, v] : space_j.items()) {
      if (k != "base" && k != "axes" && k != "weights" && k != "output_dir") {
        throw ConfigError(k, "unknown key in space file");
      }
    }
    if (!space_j.contains("base") || !space_j.contains("axes")) {
      throw ConfigError("base", "space file needs 'base' and 'axes'");
    }
    json base;
    std::filesystem::path base_dir = dir;
    if (space_j["base"].is_string()) {
      auto const p = dir / space_j["base"].get<std::string>();
      std::ifstream bin(p);
      if (!bin) {
        throw ConfigError("base", "cannot open " + p.string());
      }
      bin >> base;
      base_dir = p.parent_path();
    } else {
      base = space_j["base"];
    }
    GridSpace space;
    try {
      space = GridSpace::from_json(space_j);
    } catch (std::exception const &e) {
      throw ConfigError("axes", e.what());
    }
    ScoreWeights weights;
    if (space_j.contains("weights")) {
      weights.psnr = space_j["weights"].value("psnr", 1.0);
      weights.objective = space_j["weights"].value("objective", 0.0);
    }
    std::filesystem::path out = out_dir;
    if (out.empty()) {
      out = space_j.contains("output_dir") ? dir / space_j["output_dir"].get<std::string>()
                                           : std::filesystem::path("sweep-" + space_path.stem().string());
    }
    auto const cells_dir = out / "cells";
    std::filesystem::create_directories(cells_dir);

    auto apply = [&](json const &params) {
      json c = base;
      for (auto const &[k, v] : params.items()) {
        set_path(c, k, v);
      }
      return c;
    };
    // Validate every cell up front so a bad axis value fails before any compute.
    for (std::size_t i = 0; i < space.cells(); ++i) {
      build_experiment(parse_config(apply(space.cell(i)), base_dir));
    }
    auto cell_file = [&](std::size_t i) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "cell-%05zu.json", i);
      return cells_dir / buf;
    };

    GridSearchHooks hooks;
    hooks.lookup = [&](std::size_t i, json const &params) -> std::optional<CellMetrics> {
      std::ifstream cin(cell_file(i));
      if (!cin) {
        return std::nullopt;
      }
      try {
        json const j = json::parse(cin);
        if (j.at("params") != params) {
          return std::nullopt;
        }
        auto get = [](json const &v) { return v.is_null() ? std::nan("") : v.get<double>(); };
        return CellMetrics{get(j.at("psnr")), get(j.at("objective"))};
      } catch (json::exception const &) {
        return std::nullopt;
      }
    };
    hooks.on_complete = [&](CellResult const &c) {
      json const j = {{"index", c.index}, {"params", c.params}, {"psnr", c.metrics.psnr}, {"objective", c.metrics.objective}};
      write_text(cell_file(c.index), j.dump(2) + "\n");
    };
    auto evaluate = [&](json const &params) {
      Experiment const ex = build_experiment(parse_config(apply(params), base_dir));
      auto const outcomes = run_trials(ex);
      CellMetrics m{0.0, 0.0};
      for (auto const &o : outcomes) {
        m.psnr += o.psnr / double(outcomes.size());
        m.objective += o.final_objective.value_or(std::nan("")) / double(outcomes.size());
      }
      return m;
    };
    GridSearchResult const res = grid_search(space, evaluate, weights, hooks);
    std::size_t cached = 0;
    for (auto const &c : res.cells) {
      cached += c.cached ? 1 : 0;
    }
    write_grid_csv(space, res, out / "sweep.csv");
    write_text(out / "best_config.json", apply(res.best_cell().params).dump(2) + "\n");
    log << "cells: " << res.cells.size() << " (" << cached << " cached), best cell " << res.best << " "
        << res.best_cell().params.dump() << " score " << num(res.best_cell().score) << "\n";
    return int(kExitOk);
  });
}

int cmd_ablate(std::string const &kind, std::filesystem::path const &config, std::filesystem::path const &out_dir,
               std::ostream &log)
{
  return guarded(log, [&] {
    AblationKind const k = ablation_from_string(kind);
    ExperimentConfig const cfg = load_config(config);
    auto const out = output_dir(out_dir, cfg);
    std::filesystem::create_directories(out);
    AblationReport const rep = run_ablation(k, cfg);
    write_text(out / ("ablation_" + kind + ".json"), rep.to_json().dump(2) + "\n");
    rep.write_csv(out / ("ablation_" + kind + ".csv"));
    log << kind << ": " << rep.rows.size() << " pairs, " << rep.label_b << " wins " << num(rep.win_rate_b)
        << ", mean f0 " << rep.label_a << " " << num(rep.mean_objective_a) << " vs " << rep.label_b << " "
        << num(rep.mean_objective_b) << ", mean psnr delta " << num(rep.mean_delta_psnr) << " dB, escape rate "
        << num(rep.escape_rate_a) << " vs " << num(rep.escape_rate_b) << "\n";
    return int(kExitOk);
  });
}

int cmd_fixtures_generate(std::filesystem::path const &root, std::ostream &log)
{
  return guarded(log, [&] {
    generate_fixtures(root);
    log << "wrote " << fixture_catalog().size() << " fixtures and manifest.json under " << root.string() << "\n";
    return int(kExitOk);
  });
}

int cmd_fixtures_check(std::vector<std::string> const &names, std::filesystem::path const &root, std::ostream &log)
{
  return guarded(log, [&] {
    std::vector<FixtureCheck> checks;
    if (names.empty()) {
      checks = check_all_fixtures(root);
    } else {
      for (auto const &n : names) {
        checks.push_back(fixture_selfcheck(n, root));
      }
    }
    bool ok = true;
    for (auto const &c : checks) {
      log << (c.pass ? "PASS " : "FAIL ") << c.name << (c.pass ? "" : ": " + c.message) << "\n";
      ok = ok && c.pass;
    }
    return int(ok ? kExitOk : kExitVerify);
  });
}

} // namespace sgpnp
