#include "sgpnp/grid_search.hpp"

#include "sgpnp/error.hpp"
#include "sgpnp/parallel.hpp"

#include <fstream>
#include <mutex>

namespace sgpnp {

std::vector<double> uniform_lattice(double lo, double hi, std::size_t n)
{
  if (n == 0 || !(hi >= lo)) {
    throw DomainError("lattice needs n >= 1 and hi >= lo");
  }
  if (n == 1) {
    return {lo};
  }
  std::vector<double> v(n);
  double const step = (hi - lo) / double(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = lo + double(i) * step;
  }
  v.back() = hi;
  return v;
}

GridSpace::GridSpace(std::vector<GridAxis> axes)
  : axes_(std::move(axes))
{
  if (axes_.empty()) {
    throw DomainError("search space has no axes");
  }
  for (auto const &a : axes_) {
    if (a.values.empty()) {
      throw DomainError("search axis '" + a.name + "' is empty");
    }
    if (a.name.empty()) {
      throw DomainError("search axis without a name");
    }
  }
}

std::size_t GridSpace::cells() const
{
  if (axes_.empty()) {
    return 0;
  }
  std::size_t n = 1;
  for (auto const &a : axes_) {
    n *= a.values.size();
  }
  return n;
}

nlohmann::json GridSpace::cell(std::size_t index) const
{
  if (index >= cells()) {
    throw DomainError("cell index out of range");
  }
  nlohmann::json out = nlohmann::json::object();
  for (std::size_t a = axes_.size(); a-- > 0;) {
    auto const &axis = axes_[a];
    out[axis.name] = axis.values[index % axis.values.size()];
    index /= axis.values.size();
  }
  return out;
}

GridSpace GridSpace::from_json(nlohmann::json const &j)
{
  // {"axes": [{"name": ..., "values": [...]} | {"name": ..., "lattice": {"lo", "hi", "n"}}]}
  std::vector<GridAxis> axes;
  for (auto const &a : j.at("axes")) {
    GridAxis axis;
    axis.name = a.at("name").get<std::string>();
    if (a.contains("lattice")) {
      auto const &l = a.at("lattice");
      for (double v : uniform_lattice(l.at("lo").get<double>(), l.at("hi").get<double>(), l.at("n").get<std::size_t>())) {
        axis.values.emplace_back(v);
      }
    } else {
      for (auto const &v : a.at("values")) {
        axis.values.push_back(v);
      }
    }
    axes.push_back(std::move(axis));
  }
  return GridSpace(std::move(axes));
}

GridSearchResult grid_search(GridSpace const &space, std::function<CellMetrics(nlohmann::json const &)> const &evaluate,
                             ScoreWeights const &weights, GridSearchHooks const &hooks)
{
  std::size_t const n = space.cells();
  if (n == 0) {
    throw DomainError("search space is empty");
  }
  GridSearchResult result;
  result.cells.resize(n);
  std::mutex mu;
  parallel_for(n, [&](std::size_t i) {
    CellResult c;
    c.index = i;
    c.params = space.cell(i);
    std::optional<CellMetrics> cached;
    if (hooks.lookup) {
      cached = hooks.lookup(i, c.params);
    }
    c.cached = cached.has_value();
    c.metrics = cached ? *cached : evaluate(c.params);
    c.score = weights.score(c.metrics);
    if (!c.cached && hooks.on_complete) {
      std::lock_guard lock(mu);
      hooks.on_complete(c);
    }
    result.cells[i] = std::move(c);
  });
  for (std::size_t i = 1; i < n; ++i) {
    if (result.cells[i].score > result.cells[result.best].score) {
      result.best = i;
    }
  }
  return result;
}

void write_grid_csv(GridSpace const &space, GridSearchResult const &result, std::filesystem::path const &path)
{
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << "index";
  for (auto const &a : space.axes()) {
    out << ',' << a.name;
  }
  out << ",psnr,objective,score\n";
  out.precision(17);
  for (auto const &c : result.cells) {
    out << c.index;
    for (auto const &a : space.axes()) {
      out << ',' << c.params.at(a.name).dump();
    }
    out << ',' << c.metrics.psnr << ',' << c.metrics.objective << ',' << c.score << '\n';
  }
}

} // namespace sgpnp
