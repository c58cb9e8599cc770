#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sgpnp {

/// Process exit codes shared by every command.
enum ExitCode : int
{
  kExitOk = 0,
  kExitConfig = 2,
  kExitRuntime = 3,
  kExitVerify = 4,
};

/// Runs all trials of a config and writes run_record.json, final.sgp and
/// metrics.csv into `out_dir` (or the config's output_dir when empty).
int cmd_run(std::filesystem::path const &config, std::filesystem::path const &out_dir, std::ostream &log);

/// Runs the named suites ("all" expands to every suite). Writes the JSON
/// report to `report` when given.
int cmd_verify(std::vector<std::string> const &suites, double fault, std::optional<std::filesystem::path> const &report,
               std::ostream &log);

/// Grid search over a space file. Finished cells are stored in
/// <out>/cells/ and reused on rerun; writes sweep.csv and best_config.json.
int cmd_sweep(std::filesystem::path const &space, std::filesystem::path const &out_dir, std::ostream &log);

/// Paired ablation; writes ablation_<kind>.json and .csv into `out_dir`.
int cmd_ablate(std::string const &kind, std::filesystem::path const &config, std::filesystem::path const &out_dir,
               std::ostream &log);

int cmd_fixtures_generate(std::filesystem::path const &root, std::ostream &log);
/// Empty `names` checks everything, including generator drift.
int cmd_fixtures_check(std::vector<std::string> const &names, std::filesystem::path const &root, std::ostream &log);

} // namespace sgpnp
