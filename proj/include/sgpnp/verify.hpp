#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace sgpnp {

struct CheckResult
{
  std::string name;
  bool pass = false;
  nlohmann::json details;
};

struct SuiteReport
{
  std::string suite;
  std::vector<CheckResult> checks;
  double seconds = 0.0;

  bool pass() const;
  nlohmann::json to_json() const;
};

struct VerifyOptions
{
  /// Nonzero wraps every denoiser under test in a constant output bias.
  double fault = 0.0;
  /// Empty means fixture_dir().
  std::filesystem::path fixtures;
};

/// tweedie adapters schedules unbiased miyasawa cnc escape anneal operators
/// table2 coverage lattice fixtures, in that order.
std::vector<std::string> const &suite_names();

/// Runs one suite; "all" is not accepted here. Throws DomainError for an
/// unknown name.
SuiteReport run_suite(std::string const &name, VerifyOptions const &options = {});

} // namespace sgpnp
