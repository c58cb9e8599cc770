#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sgpnp {

/// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(std::string const &bytes);

struct FixtureEntry
{
  std::string name;
  std::string kind; // prior | config | space
  std::string path; // relative to the fixture root
  std::string description;
  /// Where each numeric constant comes from: "published", "constructed" or
  /// "derived", keyed by field.
  nlohmann::json origin;
  /// Kind-specific properties the self-check re-derives.
  nlohmann::json certify;
  /// Serialized payload, exactly as written to disk.
  std::string content;
};

/// Every shipped fixture, generated from code.
std::vector<FixtureEntry> fixture_catalog();

/// Writes all fixtures and manifest.json under `root`.
void generate_fixtures(std::filesystem::path const &root);

struct FixtureCheck
{
  std::string name;
  bool pass = false;
  std::string message;
};

/// Re-derives a fixture's certified properties from the files under `root`:
/// manifest hash, payload parse, and the kind-specific certificate (saddle or
/// minimum classification for priors, build + validation for configs).
/// Throws IoError when the fixture is not in the manifest.
FixtureCheck fixture_selfcheck(std::string const &name, std::filesystem::path const &root);

/// Self-check of every manifest entry plus a byte comparison against a fresh
/// generation.
std::vector<FixtureCheck> check_all_fixtures(std::filesystem::path const &root);

} // namespace sgpnp
