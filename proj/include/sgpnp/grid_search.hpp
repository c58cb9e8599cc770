#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sgpnp {

/// n uniformly spaced values from lo to hi inclusive.
std::vector<double> uniform_lattice(double lo, double hi, std::size_t n);

struct GridAxis
{
  std::string name;
  std::vector<nlohmann::json> values;
};

/// Cartesian product of axes. Cell indices enumerate the product in
/// lexicographic order of the per-axis value indices, first axis slowest.
class GridSpace
{
public:
  GridSpace() = default;
  explicit GridSpace(std::vector<GridAxis> axes);

  std::vector<GridAxis> const &axes() const { return axes_; }
  std::size_t cells() const;
  /// {axis name: value} for cell `index`.
  nlohmann::json cell(std::size_t index) const;

  static GridSpace from_json(nlohmann::json const &j);

private:
  std::vector<GridAxis> axes_;
};

struct CellMetrics
{
  double psnr = 0.0;
  double objective = 0.0;
};

struct CellResult
{
  std::size_t index = 0;
  nlohmann::json params;
  CellMetrics metrics;
  double score = 0.0;
  bool cached = false;
};

struct ScoreWeights
{
  double psnr = 1.0;
  double objective = 0.0;

  double score(CellMetrics const &m) const { return psnr * m.psnr - objective * m.objective; }
};

struct GridSearchHooks
{
  /// Previously finished cell, if any; such cells are not re-evaluated.
  std::function<std::optional<CellMetrics>(std::size_t, nlohmann::json const &)> lookup;
  /// Called once per freshly evaluated cell (from worker threads).
  std::function<void(CellResult const &)> on_complete;
};

struct GridSearchResult
{
  std::vector<CellResult> cells;
  std::size_t best = 0;

  CellResult const &best_cell() const { return cells.at(best); }
};

/// Evaluates every cell (in parallel) and picks the highest score. Ties go to
/// the lowest cell index.
GridSearchResult grid_search(GridSpace const &space, std::function<CellMetrics(nlohmann::json const &)> const &evaluate,
                             ScoreWeights const &weights = {}, GridSearchHooks const &hooks = {});

void write_grid_csv(GridSpace const &space, GridSearchResult const &result, std::filesystem::path const &path);

} // namespace sgpnp
