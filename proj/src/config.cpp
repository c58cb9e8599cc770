#include "sgpnp/config.hpp"

#include "sgpnp/error.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace sgpnp {

namespace {

using nlohmann::json;

std::string type_name(json const &v)
{
  return v.type_name();
}

class Reader
{
public:
  Reader(json const &j, std::string path)
    : j_(j)
    , path_(std::move(path))
  {
    if (!j_.is_object()) {
      throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object, got " + type_name(j_));
    }
  }

  std::string at(std::string const &key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(std::string const &key)
  {
    seen_.insert(key);
    return j_.contains(key);
  }

  json const &raw(std::string const &key)
  {
    if (!has(key)) {
      throw ConfigError(at(key), "required field is missing");
    }
    return j_.at(key);
  }

  double number(std::string const &key) { return as_number(raw(key), at(key)); }
  std::optional<double> opt_number(std::string const &key)
  {
    return has(key) ? std::optional(as_number(j_.at(key), at(key))) : std::nullopt;
  }

  std::uint64_t uint(std::string const &key) { return as_uint(raw(key), at(key)); }
  std::optional<std::uint64_t> opt_uint(std::string const &key)
  {
    return has(key) ? std::optional(as_uint(j_.at(key), at(key))) : std::nullopt;
  }

  bool boolean(std::string const &key)
  {
    auto const &v = raw(key);
    if (!v.is_boolean()) {
      throw ConfigError(at(key), "expected a boolean, got " + type_name(v));
    }
    return v.get<bool>();
  }

  std::string string(std::string const &key) { return as_string(raw(key), at(key)); }
  std::optional<std::string> opt_string(std::string const &key)
  {
    return has(key) ? std::optional(as_string(j_.at(key), at(key))) : std::nullopt;
  }

  std::vector<double> numbers(std::string const &key)
  {
    auto const &v = raw(key);
    if (!v.is_array()) {
      throw ConfigError(at(key), "expected an array of numbers, got " + type_name(v));
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(as_number(v[i], at(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  std::vector<std::size_t> uints(std::string const &key)
  {
    auto const &v = raw(key);
    if (!v.is_array()) {
      throw ConfigError(at(key), "expected an array of integers, got " + type_name(v));
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(as_uint(v[i], at(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  Reader child(std::string const &key) { return Reader(raw(key), at(key)); }

  /// Rejects keys that were never queried.
  void finish() const
  {
    for (auto const &[key, value] : j_.items()) {
      if (!seen_.count(key)) {
        throw ConfigError(at(key), "unknown field");
      }
    }
  }

  static double as_number(json const &v, std::string const &path)
  {
    if (!v.is_number()) {
      throw ConfigError(path, "expected a number, got " + type_name(v));
    }
    double const d = v.get<double>();
    if (!std::isfinite(d)) {
      throw ConfigError(path, "must be finite");
    }
    return d;
  }

  static std::uint64_t as_uint(json const &v, std::string const &path)
  {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw ConfigError(path, "expected a nonnegative integer, got " + (v.is_number() ? v.dump() : type_name(v)));
    }
    return v.get<std::uint64_t>();
  }

  static std::string as_string(json const &v, std::string const &path)
  {
    if (!v.is_string()) {
      throw ConfigError(path, "expected a string, got " + type_name(v));
    }
    return v.get<std::string>();
  }

private:
  json const &j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, std::string const &path, std::string const &msg)
{
  if (!ok) {
    throw ConfigError(path, msg);
  }
}

std::set<std::string> const &operator_keys(std::string const &kind)
{
  static std::map<std::string, std::set<std::string>> const keys = {
    {"identity", {}},
    {"zero", {}},
    {"mask", {"observed", "values"}},
    {"box_mask", {"r0", "c0", "h", "w"}},
    {"random_mask", {"keep", "seed"}},
    {"convolution", {"kernel", "size", "width", "angle"}},
    {"decimation", {"factor"}},
    {"subsampled_frequency", {"acceleration", "center_fraction", "seed"}},
  };
  auto it = keys.find(kind);
  if (it == keys.end()) {
    throw ConfigError("problem.operator.kind", "unknown operator kind '" + kind + "'");
  }
  return it->second;
}

OperatorConfig parse_operator(Reader r, std::vector<std::size_t> const &shape)
{
  OperatorConfig o;
  o.kind = r.string("kind");
  auto const &allowed = operator_keys(o.kind);
  auto const p = [&](char const *k) { return r.at(k); };
  auto want = [&](char const *k) { return allowed.count(k) && r.has(k); };
  std::size_t elements = 1;
  for (auto s : shape) {
    elements *= s;
  }
  if (want("observed")) {
    o.observed = r.uints("observed");
    for (auto i : *o.observed) {
      require(i < elements, p("observed"), "index " + std::to_string(i) + " outside the signal");
    }
  }
  if (want("values")) {
    o.values = r.numbers("values");
    require(o.values->size() == elements, p("values"), "needs one entry per signal element");
    for (double v : *o.values) {
      require(v == 0.0 || v == 1.0, p("values"), "mask entries must be 0 or 1");
    }
  }
  if (o.kind == "mask") {
    require(o.observed.has_value() != o.values.has_value(), r.at("observed"),
            "mask needs exactly one of 'observed' or 'values'");
  }
  if (o.kind == "box_mask") {
    o.r0 = r.uint("r0");
    o.c0 = r.uint("c0");
    o.h = r.uint("h");
    o.w = r.uint("w");
  }
  if (o.kind == "random_mask") {
    o.keep = r.number("keep");
    require(*o.keep > 0.0 && *o.keep <= 1.0, p("keep"), "must lie in (0, 1]");
    if (r.has("seed")) {
      o.seed = r.uint("seed");
    }
  }
  if (o.kind == "convolution") {
    o.kernel = r.string("kernel");
    require(*o.kernel == "gaussian" || *o.kernel == "motion", p("kernel"), "must be 'gaussian' or 'motion'");
    o.size = r.uint("size");
    require(*o.size >= 1 && *o.size % 2 == 1, p("size"), "must be a positive odd integer");
    if (*o.kernel == "gaussian") {
      o.width = r.number("width");
      require(*o.width > 0.0, p("width"), "must be positive");
    } else {
      o.angle = r.number("angle");
    }
  }
  if (o.kind == "decimation") {
    o.factor = r.uint("factor");
    require(*o.factor >= 1, p("factor"), "must be at least 1");
  }
  if (o.kind == "subsampled_frequency") {
    o.acceleration = r.number("acceleration");
    require(*o.acceleration >= 1.0, p("acceleration"), "must be at least 1");
    o.center_fraction = r.opt_number("center_fraction").value_or(0.25);
    require(*o.center_fraction >= 0.0 && *o.center_fraction <= 1.0, p("center_fraction"), "must lie in [0, 1]");
    if (r.has("seed")) {
      o.seed = r.uint("seed");
    }
  }
  r.finish();
  return o;
}

json to_json(OperatorConfig const &o)
{
  json j = {{"kind", o.kind}};
  if (o.observed) {
    j["observed"] = *o.observed;
  }
  if (o.values) {
    j["values"] = *o.values;
  }
  if (o.r0) {
    j["r0"] = *o.r0;
    j["c0"] = *o.c0;
    j["h"] = *o.h;
    j["w"] = *o.w;
  }
  if (o.keep) {
    j["keep"] = *o.keep;
  }
  if (o.seed) {
    j["seed"] = *o.seed;
  }
  if (o.kernel) {
    j["kernel"] = *o.kernel;
  }
  if (o.size) {
    j["size"] = *o.size;
  }
  if (o.width) {
    j["width"] = *o.width;
  }
  if (o.angle) {
    j["angle"] = *o.angle;
  }
  if (o.factor) {
    j["factor"] = *o.factor;
  }
  if (o.acceleration) {
    j["acceleration"] = *o.acceleration;
  }
  if (o.center_fraction) {
    j["center_fraction"] = *o.center_fraction;
  }
  return j;
}

PlanConfig parse_plan(Reader r, bool allow_zero_start)
{
  PlanConfig p;
  p.start = r.number("start");
  p.end = r.has("end") ? r.number("end") : p.start;
  require(allow_zero_start ? p.start >= 0.0 : p.start > 0.0, r.at("start"),
          allow_zero_start ? "must be nonnegative" : "must be positive");
  require(p.end >= 0.0, r.at("end"), "must be nonnegative");
  require(p.end <= p.start, r.at("end"), "must not exceed start");
  r.finish();
  return p;
}

} // namespace

ExperimentConfig parse_config(nlohmann::json const &j, std::filesystem::path const &base_dir)
{
  Reader root(j, "");
  ExperimentConfig c;
  c.base_dir = base_dir;
  c.name = root.opt_string("name").value_or("");
  c.seed = root.opt_uint("seed").value_or(0);
  c.trials = root.opt_uint("trials").value_or(1);
  require(c.trials >= 1, "trials", "must be at least 1");
  c.output_dir = root.opt_string("output_dir");

  {
    Reader p = root.child("problem");
    c.problem.shape = p.uints("shape");
    require(!c.problem.shape.empty() && c.problem.shape.size() <= 2, "problem.shape", "rank must be 1 or 2");
    for (auto s : c.problem.shape) {
      require(s > 0, "problem.shape", "dimensions must be positive");
    }
    if (p.has("complex")) {
      c.problem.is_complex = p.boolean("complex");
    }
    c.problem.op = parse_operator(p.child("operator"), c.problem.shape);
    if (c.problem.op.kind == "subsampled_frequency") {
      require(c.problem.is_complex, "problem.complex", "subsampled_frequency needs complex signals");
    }
    if (c.problem.op.kind == "convolution" || c.problem.op.kind == "decimation") {
      require(!c.problem.is_complex, "problem.complex", c.problem.op.kind + " acts on real signals");
    }
    if (p.has("ground_truth")) {
      Reader g = p.child("ground_truth");
      c.problem.ground_truth.source = g.string("source");
      auto const &src = c.problem.ground_truth.source;
      if (src == "file") {
        c.problem.ground_truth.path = g.string("path");
      } else if (src == "values") {
        c.problem.ground_truth.values = g.numbers("values");
      } else {
        require(src == "gmm_sample", g.at("source"), "must be 'gmm_sample', 'file' or 'values'");
      }
      g.finish();
    }
    c.problem.eta = p.opt_number("eta").value_or(0.0);
    require(c.problem.eta >= 0.0, "problem.eta", "must be nonnegative");
    c.problem.peak = p.opt_number("peak");
    if (c.problem.peak) {
      require(*c.problem.peak > 0.0, "problem.peak", "must be positive");
    }
    p.finish();
  }

  {
    Reader p = root.child("prior");
    c.prior.fixture = p.opt_string("fixture");
    c.prior.file = p.opt_string("file");
    if (p.has("inline")) {
      c.prior.inline_prior = p.raw("inline");
      require(c.prior.inline_prior->is_object(), "prior.inline", "expected an object");
    }
    int const sources = int(c.prior.fixture.has_value()) + int(c.prior.file.has_value()) +
                        int(c.prior.inline_prior.has_value());
    require(sources == 1, "prior", "exactly one of 'fixture', 'file' or 'inline' is required");
    p.finish();
  }

  if (root.has("denoiser")) {
    Reader d = root.child("denoiser");
    c.denoiser.kind = d.string("kind");
    require(c.denoiser.kind == "gmm" || c.denoiser.kind == "ve" || c.denoiser.kind == "vp", d.at("kind"),
            "must be 'gmm', 've' or 'vp'");
    if (d.has("schedule")) {
      require(c.denoiser.kind != "gmm", d.at("schedule"), "the gmm denoiser takes no schedule");
      c.denoiser.schedule = d.raw("schedule");
      require(c.denoiser.schedule->is_object(), d.at("schedule"), "expected an object");
    }
    if (d.has("clamp")) {
      Reader k = d.child("clamp");
      ClampConfig cl;
      cl.lo = k.number("lo");
      cl.hi = k.number("hi");
      if (k.has("inject")) {
        cl.inject = k.boolean("inject");
      }
      require(cl.lo >= 0.0 && cl.hi >= cl.lo, k.at("hi"), "clamp needs 0 <= lo <= hi");
      k.finish();
      c.denoiser.clamp = cl;
    }
    c.denoiser.bias = d.opt_number("bias").value_or(0.0);
    c.denoiser.score_perturbation = d.opt_number("score_perturbation").value_or(0.0);
    require(c.denoiser.score_perturbation == 0.0 || c.denoiser.kind != "gmm", d.at("score_perturbation"),
            "only score-model denoisers (ve, vp) can be perturbed");
    d.finish();
  }

  {
    Reader s = root.child("solver");
    auto &sv = c.solver;
    sv.algorithm = s.string("algorithm");
    require(sv.algorithm == "admm" || sv.algorithm == "pgm" || sv.algorithm == "red" || sv.algorithm == "hqs",
            s.at("algorithm"), "must be one of admm, pgm, red, hqs");
    sv.iterations = s.uint("iterations");
    auto const &g = s.raw("gamma");
    sv.gamma = g.is_array() ? s.numbers("gamma") : std::vector<double>{s.number("gamma")};
    require(sv.gamma.size() == 1 || sv.gamma.size() == sv.iterations, s.at("gamma"),
            "must be a number or have one entry per iteration");
    for (double v : sv.gamma) {
      require(v > 0.0, s.at("gamma"), "must be positive");
    }
    bool const needs_tau = sv.algorithm == "pgm" || sv.algorithm == "red";
    if (s.has("tau")) {
      require(needs_tau, s.at("tau"), "only pgm and red take tau");
      auto const &t = s.raw("tau");
      if (t.is_string()) {
        require(t.get<std::string>() == "inv_sigma2", s.at("tau"), "the only symbolic value is 'inv_sigma2'");
        sv.tau_inverse_sigma2 = true;
      } else {
        sv.tau = t.is_array() ? s.numbers("tau") : std::vector<double>{s.number("tau")};
        require(sv.tau->size() == 1 || sv.tau->size() == sv.iterations, s.at("tau"),
                "must be a number or have one entry per iteration");
        for (double v : *sv.tau) {
          require(v > 0.0, s.at("tau"), "must be positive");
        }
      }
    } else {
      require(!needs_tau, s.at("tau"), "required for " + sv.algorithm);
    }
    sv.sigma_cond = parse_plan(s.child("sigma_cond"), false);
    if (s.has("sigma_inject")) {
      sv.sigma_inject = parse_plan(s.child("sigma_inject"), true);
    }
    if (s.has("pgm_order")) {
      require(sv.algorithm == "pgm", s.at("pgm_order"), "only pgm takes pgm_order");
      sv.pgm_order = s.string("pgm_order");
      require(sv.pgm_order == "listing" || sv.pgm_order == "gradient_then_prox", s.at("pgm_order"),
              "must be 'listing' or 'gradient_then_prox'");
    }
    s.finish();
  }

  if (root.has("init")) {
    auto const &i = root.raw("init");
    if (i.is_string()) {
      require(i.get<std::string>() == "measurement", "init", "the only symbolic value is 'measurement'");
    } else {
      Reader r(i, "init");
      c.init.measurement = false;
      c.init.values = r.numbers("values");
      r.finish();
    }
  }
  root.finish();
  return c;
}

ExperimentConfig load_config(std::filesystem::path const &path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(path.string(), "cannot open configuration file");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (nlohmann::json::exception const &e) {
    throw ConfigError(path.string(), std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j, path.parent_path());
}

nlohmann::json to_json(ExperimentConfig const &c)
{
  json j;
  if (!c.name.empty()) {
    j["name"] = c.name;
  }
  j["seed"] = c.seed;
  j["trials"] = c.trials;
  if (c.output_dir) {
    j["output_dir"] = *c.output_dir;
  }
  json p = {{"shape", c.problem.shape}, {"complex", c.problem.is_complex}, {"operator", to_json(c.problem.op)}};
  json g = {{"source", c.problem.ground_truth.source}};
  if (c.problem.ground_truth.path) {
    g["path"] = *c.problem.ground_truth.path;
  }
  if (c.problem.ground_truth.values) {
    g["values"] = *c.problem.ground_truth.values;
  }
  p["ground_truth"] = g;
  p["eta"] = c.problem.eta;
  if (c.problem.peak) {
    p["peak"] = *c.problem.peak;
  }
  j["problem"] = p;

  json pr = json::object();
  if (c.prior.fixture) {
    pr["fixture"] = *c.prior.fixture;
  }
  if (c.prior.file) {
    pr["file"] = *c.prior.file;
  }
  if (c.prior.inline_prior) {
    pr["inline"] = *c.prior.inline_prior;
  }
  j["prior"] = pr;

  json d = {{"kind", c.denoiser.kind}, {"bias", c.denoiser.bias}};
  if (c.denoiser.schedule) {
    d["schedule"] = *c.denoiser.schedule;
  }
  if (c.denoiser.clamp) {
    d["clamp"] = {{"lo", c.denoiser.clamp->lo}, {"hi", c.denoiser.clamp->hi}, {"inject", c.denoiser.clamp->inject}};
  }
  if (c.denoiser.score_perturbation != 0.0) {
    d["score_perturbation"] = c.denoiser.score_perturbation;
  }
  j["denoiser"] = d;

  auto const &sv = c.solver;
  json s = {
    {"algorithm", sv.algorithm},
    {"iterations", sv.iterations},
    {"sigma_cond", {{"start", sv.sigma_cond.start}, {"end", sv.sigma_cond.end}}},
    {"sigma_inject", {{"start", sv.sigma_inject.start}, {"end", sv.sigma_inject.end}}},
  };
  s["gamma"] = sv.gamma.size() == 1 ? json(sv.gamma.front()) : json(sv.gamma);
  if (sv.tau_inverse_sigma2) {
    s["tau"] = "inv_sigma2";
  } else if (sv.tau) {
    s["tau"] = sv.tau->size() == 1 ? json(sv.tau->front()) : json(*sv.tau);
  }
  if (sv.algorithm == "pgm") {
    s["pgm_order"] = sv.pgm_order;
  }
  j["solver"] = s;
  j["init"] = c.init.measurement ? json("measurement") : json{{"values", c.init.values}};
  return j;
}

void set_path(nlohmann::json &j, std::string const &dotted, nlohmann::json const &value)
{
  nlohmann::json *cur = &j;
  std::size_t pos = 0;
  while (true) {
    auto const dot = dotted.find('.', pos);
    std::string const key = dotted.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (key.empty()) {
      throw ConfigError(dotted, "empty path component");
    }
    if (!cur->is_object()) {
      throw ConfigError(dotted, "path does not lead through objects");
    }
    if (dot == std::string::npos) {
      (*cur)[key] = value;
      return;
    }
    if (!cur->contains(key)) {
      (*cur)[key] = nlohmann::json::object();
    }
    cur = &(*cur)[key];
    pos = dot + 1;
  }
}

} // namespace sgpnp
