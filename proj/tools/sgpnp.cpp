#include "sgpnp/commands.hpp"
#include "sgpnp/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char **argv)
{
  using namespace sgpnp;
  CLI::App app{"Stochastic and deterministic plug-and-play solvers with an analytic GMM prior"};
  app.require_subcommand(1);

  std::string config, out, space;
  auto *run = app.add_subcommand("run", "run a configuration and write its artifacts");
  run->add_option("-c,--config", config, "experiment configuration (JSON)")->required();
  run->add_option("-o,--out", out, "output directory (default: the config's output_dir)");

  std::vector<std::string> suites;
  double fault = 0.0;
  std::string report;
  auto *verify = app.add_subcommand("verify", "run invariant suites");
  verify->add_option("suites", suites, "suite names or 'all'")->required();
  verify->add_option("--fault", fault, "add a constant bias to every denoiser under test");
  verify->add_option("-o,--report", report, "write the JSON report here");

  auto *sweep = app.add_subcommand("sweep", "grid search over a parameter space");
  sweep->add_option("-c,--config", space, "space file (JSON)")->required();
  sweep->add_option("-o,--out", out, "output directory");

  std::string kind;
  auto *ablate = app.add_subcommand("ablate", "paired ablation: decouple, coverage or detvsstoch");
  ablate->add_option("kind", kind, "ablation kind")->required()->check(CLI::IsMember({"decouple", "coverage", "detvsstoch"}));
  ablate->add_option("-c,--config", config, "experiment configuration (JSON)")->required();
  ablate->add_option("-o,--out", out, "output directory (default: the config's output_dir)");

  std::string root = fixture_dir().string();
  std::vector<std::string> names;
  auto *fixtures = app.add_subcommand("fixtures", "generate or check the shipped fixtures");
  fixtures->require_subcommand(1);
  auto *gen = fixtures->add_subcommand("generate", "write all fixtures and the manifest");
  gen->add_option("--dir", root, "fixture root");
  auto *check = fixtures->add_subcommand("check", "self-check fixtures");
  check->add_option("names", names, "fixture names (default: all)");
  check->add_option("--dir", root, "fixture root");

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const &e) {
    int const code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*run) {
    return cmd_run(config, out, std::cout);
  }
  if (*verify) {
    return cmd_verify(suites, fault, report.empty() ? std::nullopt : std::optional<std::filesystem::path>(report),
                      std::cout);
  }
  if (*sweep) {
    return cmd_sweep(space, out, std::cout);
  }
  if (*ablate) {
    return cmd_ablate(kind, config, out, std::cout);
  }
  if (*gen) {
    return cmd_fixtures_generate(root, std::cout);
  }
  return cmd_fixtures_check(names, root, std::cout);
}
