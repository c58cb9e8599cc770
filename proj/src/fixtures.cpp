#include "sgpnp/fixtures.hpp"

#include "sgpnp/analysis.hpp"
#include "sgpnp/config.hpp"
#include "sgpnp/error.hpp"
#include "sgpnp/experiment.hpp"
#include "sgpnp/gmm.hpp"
#include "sgpnp/grid_search.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

namespace sgpnp {

using nlohmann::json;

std::uint64_t fnv1a64(std::string const &bytes)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string hex64(std::uint64_t v)
{
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string dump(json const &j) { return j.dump(2) + "\n"; }

Eigen::VectorXd vec(std::initializer_list<double> v)
{
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  std::copy(v.begin(), v.end(), out.data());
  return out;
}

Eigen::MatrixXd mat2(double a, double b, double d)
{
  Eigen::MatrixXd m(2, 2);
  m << a, b, b, d;
  return m;
}

FixtureEntry prior_entry(std::string name, std::string description, GmmPrior const &prior, json certify)
{
  FixtureEntry e;
  e.name = std::move(name);
  e.kind = "prior";
  e.path = "priors/" + e.name + ".json";
  e.description = std::move(description);
  e.origin = {{"weights", "constructed"}, {"means", "constructed"}, {"covariances", "constructed"}};
  e.certify = std::move(certify);
  e.content = dump(prior.to_json());
  return e;
}

std::vector<FixtureEntry> priors()
{
  std::vector<FixtureEntry> out;

  out.push_back(prior_entry("gaussian-1d", "single standard normal; annealing control with a closed-form MAP",
                            GmmPrior::isotropic({1.0}, {vec({0.0})}, {1.0}),
                            {{"critical", {{"x_init", {0.3}}, {"expect", {0.0}}, {"kind", "local-min"}}}}));

  out.push_back(prior_entry("bimodal-1d", "N(-3, 0.25) and N(3, 0.25), equal weights; strict saddle of -log p at 0",
                            GmmPrior::isotropic({0.5, 0.5}, {vec({-3.0}), vec({3.0})}, {0.25, 0.25}),
                            {{"critical", {{"x_init", {0.05}}, {"expect", {0.0}}, {"kind", "strict-saddle"}}}}));

  // Observing the second coordinate at y = 0 keeps g convex and the saddle at the origin.
  out.push_back(prior_entry(
      "bimodal-2d", "modes (-3, 0) and (3, 0), variance 0.25; strict saddle at the origin under g = 0.5 x_2^2",
      GmmPrior::isotropic({0.5, 0.5}, {vec({-3.0, 0.0}), vec({3.0, 0.0})}, {0.25, 0.25}),
      {{"critical",
        {{"x_init", {0.05, 0.02}}, {"expect", {0.0, 0.0}}, {"kind", "strict-saddle"}, {"observed", {1}}, {"y", {0.0}}}}}));

  out.push_back(prior_entry("mixture-2d", "three components with full covariances",
                            GmmPrior({0.3, 0.5, 0.2}, {vec({-1.0, 0.5}), vec({1.5, -0.5}), vec({0.0, 2.0})},
                                     {mat2(0.6, 0.2, 0.4), mat2(0.3, -0.1, 0.5), mat2(1.0, 0.3, 0.8)}),
                            json::object()));

  // A light narrow component between two heavy modes: 0 is a spurious local minimum of -log p.
  out.push_back(prior_entry("trap-1d", "heavy modes at -3 and 3 with a light narrow component at 0 (spurious minimum)",
                            GmmPrior::isotropic({0.49, 0.02, 0.49}, {vec({-3.0}), vec({0.0}), vec({3.0})},
                                                {0.25, 0.09, 0.25}),
                            {{"critical", {{"x_init", {0.05}}, {"expect", {0.0}}, {"kind", "local-min"}}}}));

  Eigen::VectorXd const c = vec({0.5, -0.3, 0.8, 0.1, -0.6, 0.4, -0.2, 0.7});
  Eigen::VectorXd const b = vec({1.0, 0.8, -0.6, 0.9, -1.1, 0.7, 0.5, -0.9});
  Eigen::VectorXd m1(16), m2(16);
  m1 << c, b;
  m2 << c, -b;
  out.push_back(prior_entry("bimodal-16d", "16-D bimodal mixture: shared first half, opposite second half, variance 0.1",
                            GmmPrior::isotropic({0.5, 0.5}, {m1, m2}, {0.1, 0.1}), json::object()));
  return out;
}

json plan(double start, double end) { return {{"start", start}, {"end", end}}; }

FixtureEntry config_entry(std::string name, std::string description, json config, json origin, json certify = {})
{
  FixtureEntry e;
  e.name = std::move(name);
  e.kind = "config";
  e.path = "configs/" + e.name + ".json";
  e.description = std::move(description);
  e.origin = std::move(origin);
  e.certify = certify.is_null() ? json::object() : std::move(certify);
  e.content = dump(config);
  return e;
}

json masked16(std::string const &algorithm)
{
  std::vector<std::size_t> observed(8);
  for (std::size_t i = 0; i < 8; ++i) {
    observed[i] = i;
  }
  json j = {
      {"name", "masked16-" + algorithm},
      {"seed", 2024},
      {"trials", 50},
      {"problem",
       {{"shape", {16}},
        {"operator", {{"kind", "mask"}, {"observed", observed}}},
        {"ground_truth", {{"source", "gmm_sample"}}},
        {"eta", 0.05}}},
      {"prior", {{"fixture", "bimodal-16d"}}},
      {"denoiser", {{"kind", "gmm"}}},
      {"solver",
       {{"algorithm", algorithm},
        {"iterations", 100},
        {"gamma", 1.0},
        {"sigma_cond", plan(1.0, 0.05)},
        {"sigma_inject", plan(1.0, 0.01)}}},
  };
  if (algorithm == "pgm") {
    j["solver"]["tau"] = 0.5;
  }
  return j;
}

std::vector<FixtureEntry> configs()
{
  std::vector<FixtureEntry> out;
  json const constructed = {{"all", "constructed"}};

  out.push_back(config_entry(
      "minimal", "identity operator on two stacked 2-D blocks, 20 ADMM iterations",
      {{"name", "minimal"},
       {"seed", 7},
       {"problem",
        {{"shape", {4}},
         {"operator", {{"kind", "identity"}}},
         {"ground_truth", {{"source", "gmm_sample"}}},
         {"eta", 0.1}}},
       {"prior", {{"fixture", "bimodal-2d"}}},
       {"denoiser", {{"kind", "gmm"}}},
       {"solver",
        {{"algorithm", "admm"},
         {"iterations", 20},
         {"gamma", 1.0},
         {"sigma_cond", plan(0.5, 0.05)},
         {"sigma_inject", plan(0.5, 0.01)}}}},
      constructed));

  for (std::string alg : {"admm", "pgm", "hqs"}) {
    out.push_back(config_entry("masked16-" + alg,
                               "16-D bimodal prior, first 8 coordinates observed with eta = 0.05, 50 paired trials",
                               masked16(alg), constructed));
  }

  out.push_back(config_entry(
      "coverage", "trap-1d prior with g = 0, PGM started at the spurious minimum, paired over 50 seeds",
      {{"name", "coverage"},
       {"seed", 11},
       {"trials", 50},
       {"problem",
        {{"shape", {1}},
         {"operator", {{"kind", "zero"}}},
         {"ground_truth", {{"source", "values"}, {"values", {0.0}}}}}},
       {"prior", {{"fixture", "trap-1d"}}},
       {"denoiser", {{"kind", "gmm"}}},
       {"solver",
        {{"algorithm", "pgm"},
         {"iterations", 200},
         {"gamma", 1.0},
         {"tau", 0.5},
         {"sigma_cond", plan(1.5, 0.05)},
         {"sigma_inject", plan(1.5, 0.05)}}},
       {"init", {{"values", {0.0}}}}},
      {{"all", "constructed"}, {"denoiser.clamp (ablation)", "published"}}));

  out.push_back(config_entry(
      "escape-red", "bimodal-1d with g = 0, RED from the saddle with tau = sigma^-2",
      {{"name", "escape-red"},
       {"seed", 5},
       {"trials", 100},
       {"problem",
        {{"shape", {1}},
         {"operator", {{"kind", "zero"}}},
         {"ground_truth", {{"source", "values"}, {"values", {0.0}}}}}},
       {"prior", {{"fixture", "bimodal-1d"}}},
       {"denoiser", {{"kind", "gmm"}}},
       {"solver",
        {{"algorithm", "red"},
         {"iterations", 300},
         {"gamma", 0.02},
         {"tau", "inv_sigma2"},
         {"sigma_cond", plan(0.5, 0.5)},
         {"sigma_inject", plan(0.5, 0.5)}}},
       {"init", {{"values", {0.0}}}}},
      constructed));
  return out;
}

struct HparamRow
{
  std::string problem;
  std::string method;
  double gamma;
  double tau; // 0 when the method takes none
  double cond;
  double inject;
  std::size_t iterations;
};

// Published hyperparameter rows; the second deblur "SGPnP-ADMM" row is the SDPnP-ADMM row.
std::vector<HparamRow> const &hparam_rows()
{
  static std::vector<HparamRow> const rows = {
      {"inpainting", "sgpnp-admm", 1.7, 0, 15, 15, 200},
      {"inpainting", "sgpnp-dpir", 1.5, 0, 15, 15, 200},
      {"inpainting", "sgpnp-pgm", 0.22, 0.4, 20, 20, 200},
      {"inpainting", "sdpnp-admm", 1.32, 0, 5, 0, 50},
      {"inpainting", "sdpnp-dpir", 2.0, 0, 0.3, 0, 10},
      {"inpainting", "sdpnp-pgm", 2.0, 0.4, 20, 0, 200},
      {"inpainting", "dpir", 1.627, 0, 0.1921, 0, 50},
      {"deblur", "sgpnp-admm", 1.398, 0, 7.5, 7.5, 200},
      {"deblur", "sgpnp-dpir", 1.55, 0, 25, 25, 200},
      {"deblur", "sgpnp-pgm", 0.6286, 0.3, 20, 20, 200},
      {"deblur", "sdpnp-admm", 1.32, 0, 5, 0, 50},
      {"deblur", "sdpnp-dpir", 2.0, 0, 2, 0, 10},
      {"deblur", "sdpnp-pgm", 0.66, 0.4, 2.0, 0, 10},
      {"deblur", "dpir", 1.627, 0, 0.1921, 0, 10},
      {"sr", "sgpnp-admm", 1.45, 0, 50, 50, 200},
      {"sr", "sgpnp-dpir", 2.25, 0, 15, 15, 200},
      {"sr", "sgpnp-pgm", 0.6286, 0.3, 20, 20, 200},
      {"sr", "sdpnp-admm", 1.32, 0, 0.6, 0, 20},
      {"sr", "sdpnp-dpir", 0.608, 0, 157, 0, 50},
      {"sr", "sdpnp-pgm", 1.48, 0.95, 20, 0, 100},
      {"sr", "dpir", 1.627, 0, 0.1921, 0, 50},
      {"csmri", "sgpnp-admm", 2.19, 0, 1.0, 0.01, 200},
      {"csmri", "sgpnp-dpir", 3.5, 0, 0.1, 0.01, 200},
      {"csmri", "sgpnp-pgm", 1.7, 0.75, 1.0, 0.01, 200},
      {"csmri", "sdpnp-admm", 1.5, 0, 50, 0, 200},
      {"csmri", "sdpnp-dpir", 2.5, 0, 0.9, 0, 200},
      {"csmri", "sdpnp-pgm", 1.4, 0.63, 7.5, 0, 200},
      {"csmri", "dpir", 35.0, 0, 0.192, 0, 10},
  };
  return rows;
}

json desk_problem(std::string const &problem)
{
  json p = {{"shape", {8, 8}}, {"ground_truth", {{"source", "gmm_sample"}}}, {"eta", 0.01}};
  if (problem == "inpainting") {
    p["operator"] = {{"kind", "box_mask"}, {"r0", 2}, {"c0", 2}, {"h", 4}, {"w", 4}};
  } else if (problem == "deblur") {
    p["operator"] = {{"kind", "convolution"}, {"kernel", "motion"}, {"size", 5}, {"angle", 45.0}};
  } else if (problem == "sr") {
    p["operator"] = {{"kind", "decimation"}, {"factor", 2}};
  } else {
    p["complex"] = true;
    p["operator"] = {{"kind", "subsampled_frequency"}, {"acceleration", 4.0}, {"center_fraction", 0.25}, {"seed", 3}};
  }
  return p;
}

std::vector<FixtureEntry> hparams()
{
  std::vector<FixtureEntry> out;
  for (auto const &r : hparam_rows()) {
    std::string const alg = r.method.ends_with("admm") ? "admm" : r.method.ends_with("pgm") ? "pgm" : "hqs";
    json solver = {{"algorithm", alg},
                   {"iterations", r.iterations},
                   {"gamma", r.gamma},
                   {"sigma_cond", plan(r.cond, std::min(r.cond, 0.05))},
                   {"sigma_inject", plan(r.inject, std::min(r.inject, 0.01))}};
    if (alg == "pgm") {
      solver["tau"] = r.tau;
    }
    json den = r.method == "dpir" ? json{{"kind", "gmm"}, {"clamp", {{"lo", 0.0}, {"hi", 0.192}, {"inject", true}}}}
                                  : json{{"kind", "vp"}};
    std::string const name = r.problem + "-" + r.method;
    json cfg = {{"name", name}, {"seed", 0},      {"trials", 1},   {"problem", desk_problem(r.problem)},
                {"prior", {{"fixture", "bimodal-16d"}}}, {"denoiser", den}, {"solver", solver}};
    json row = {{"gamma", r.gamma},
                {"tau", r.tau == 0.0 ? json(nullptr) : json(r.tau)},
                {"sigma_cond", r.cond},
                {"sigma_inject", r.inject},
                {"iterations", r.iterations}};
    json origin = {{"solver.gamma", "published"},
                   {"solver.tau", "published"},
                   {"solver.sigma_cond.start", "published"},
                   {"solver.sigma_inject.start", "published"},
                   {"solver.iterations", "published"},
                   {"solver.sigma_cond.end", "derived"},
                   {"solver.sigma_inject.end", "derived"},
                   {"denoiser.clamp", "published"},
                   {"problem", "constructed"}};
    FixtureEntry e;
    e.name = name;
    e.kind = "config";
    e.path = "hparams/" + name + ".json";
    e.description = "8x8 " + r.problem + " with the published " + r.method + " hyperparameters";
    e.origin = origin;
    e.certify = {{"row", row}};
    e.content = dump(cfg);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<FixtureEntry> spaces()
{
  json space = {{"base", "../configs/minimal.json"},
                {"axes",
                 {{{"name", "solver.gamma"}, {"values", {0.5, 1.0}}},
                  {{"name", "solver.sigma_cond.start"}, {"values", {0.5, 1.0}}}}},
                {"weights", {{"psnr", 1.0}, {"objective", 0.0}}}};
  json lattice = {{"base", "../configs/minimal.json"},
                  {"axes", {{{"name", "solver.gamma"}, {"lattice", {{"lo", 0.01}, {"hi", 5.0}, {"n", 40}}}}}}};
  FixtureEntry a{"sweep-2x2", "space", "spaces/sweep-2x2.json", "2x2 grid over gamma and sigma_cond.start",
                 {{"all", "constructed"}}, {{"cells", 4}}, dump(space)};
  FixtureEntry b{"sweep-gamma-lattice", "space", "spaces/sweep-gamma-lattice.json",
                 "40-point uniform step-size lattice over [0.01, 5]", {{"lattice", "published"}}, {{"cells", 40}},
                 dump(lattice)};
  return {a, b};
}

json manifest_json(std::vector<FixtureEntry> const &cat)
{
  json list = json::array();
  for (auto const &e : cat) {
    list.push_back({{"name", e.name},
                    {"kind", e.kind},
                    {"path", e.path},
                    {"description", e.description},
                    {"fnv1a64", hex64(fnv1a64(e.content))},
                    {"origin", e.origin},
                    {"certify", e.certify}});
  }
  return {{"generator", "sgpnp fixtures generate"}, {"fixtures", list}};
}

std::string read_file(std::filesystem::path const &p)
{
  std::ifstream in(p, std::ios::binary);
  if (!in) {
    throw IoError("cannot read " + p.string());
  }
  return std::string(std::istreambuf_iterator<char>(in), {});
}

json load_manifest(std::filesystem::path const &root)
{
  try {
    return json::parse(read_file(root / "manifest.json"));
  } catch (json::exception const &e) {
    throw IoError("manifest.json: " + std::string(e.what()));
  }
}

CriticalKind kind_from(std::string const &s)
{
  if (s == "strict-saddle") {
    return CriticalKind::StrictSaddle;
  }
  if (s == "local-min") {
    return CriticalKind::LocalMin;
  }
  throw IoError("unknown certificate kind '" + s + "'");
}

void certify_prior(json const &cert, std::string const &content, std::vector<std::string> &problems)
{
  GmmPrior const prior = GmmPrior::from_json(json::parse(content));
  if (!cert.contains("critical")) {
    return;
  }
  auto const &c = cert.at("critical");
  auto const x0 = c.at("x_init").get<std::vector<double>>();
  auto const expect = c.at("expect").get<std::vector<double>>();
  std::optional<FidelityProblem> fid;
  if (c.contains("observed")) {
    Signal m({x0.size()});
    for (auto i : c.at("observed").get<std::vector<std::size_t>>()) {
      m[i] = 1.0;
    }
    auto const op = LinearOperator::mask(m);
    Signal y = op.zeros_output();
    auto const yv = c.at("y").get<std::vector<double>>();
    for (std::size_t i = 0, k = 0; i < m.size(); ++i) {
      if (m[i] != 0.0) {
        y[i] = yv.at(k++);
      }
    }
    fid = FidelityProblem(op, y);
  }
  SmoothedObjective const obj(prior, fid, 0.0);
  SaddleReport const rep = find_saddle(obj, Signal({x0.size()}, x0));
  if (rep.kind != kind_from(c.at("kind").get<std::string>())) {
    problems.push_back("critical point classified as " + to_string(rep.kind));
  }
  double dist = 0.0;
  for (std::size_t i = 0; i < expect.size(); ++i) {
    dist = std::max(dist, std::abs(rep.point[i] - expect[i]));
  }
  if (dist > 1e-8) {
    problems.push_back("critical point found " + std::to_string(dist) + " away from the certified location");
  }
}

void certify_config(FixtureEntry const &e, std::filesystem::path const &file, std::vector<std::string> &problems)
{
  ExperimentConfig const cfg = load_config(file);
  Experiment const ex = build_experiment(cfg);
  if (!e.certify.contains("row")) {
    return;
  }
  auto const &row = e.certify.at("row");
  auto const &s = cfg.solver;
  auto mismatch = [&](char const *field, double want, double got) {
    if (want != got) {
      problems.push_back(std::string(field) + " is " + std::to_string(got) + ", row has " + std::to_string(want));
    }
  };
  mismatch("gamma", row.at("gamma").get<double>(), s.gamma.at(0));
  if (!row.at("tau").is_null()) {
    mismatch("tau", row.at("tau").get<double>(), s.tau ? s.tau->at(0) : 0.0);
  }
  mismatch("sigma_cond", row.at("sigma_cond").get<double>(), s.sigma_cond.start);
  mismatch("sigma_inject", row.at("sigma_inject").get<double>(), s.sigma_inject.start);
  mismatch("iterations", row.at("iterations").get<double>(), double(s.iterations));
}

void certify_space(FixtureEntry const &e, std::filesystem::path const &file, std::vector<std::string> &problems)
{
  json const j = json::parse(read_file(file));
  GridSpace const space = GridSpace::from_json(j);
  auto const want = e.certify.at("cells").get<std::size_t>();
  if (space.cells() != want) {
    problems.push_back("space has " + std::to_string(space.cells()) + " cells, expected " + std::to_string(want));
  }
  load_config(file.parent_path() / j.at("base").get<std::string>());
}

} // namespace

std::vector<FixtureEntry> fixture_catalog()
{
  std::vector<FixtureEntry> out = priors();
  for (auto *group : {configs, hparams, spaces}) {
    auto more = group();
    std::move(more.begin(), more.end(), std::back_inserter(out));
  }
  return out;
}

void generate_fixtures(std::filesystem::path const &root)
{
  auto const cat = fixture_catalog();
  auto write = [&](std::filesystem::path const &rel, std::string const &content) {
    auto const path = root / rel;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) {
      throw IoError("cannot write " + path.string());
    }
  };
  for (auto const &e : cat) {
    write(e.path, e.content);
  }
  write("manifest.json", dump(manifest_json(cat)));
}

FixtureCheck fixture_selfcheck(std::string const &name, std::filesystem::path const &root)
{
  json const manifest = load_manifest(root);
  json const *found = nullptr;
  for (auto const &f : manifest.at("fixtures")) {
    if (f.at("name") == name) {
      found = &f;
    }
  }
  if (!found) {
    throw IoError("missing fixture '" + name + "'");
  }
  FixtureEntry e;
  e.name = name;
  e.kind = found->at("kind").get<std::string>();
  e.path = found->at("path").get<std::string>();
  e.certify = found->at("certify");

  FixtureCheck chk{name, false, ""};
  std::vector<std::string> problems;
  try {
    auto const file = root / e.path;
    std::string const content = read_file(file);
    if (hex64(fnv1a64(content)) != found->at("fnv1a64").get<std::string>()) {
      problems.push_back("content hash does not match the manifest");
    }
    if (e.kind == "prior") {
      certify_prior(e.certify, content, problems);
    } else if (e.kind == "config") {
      certify_config(e, file, problems);
    } else if (e.kind == "space") {
      certify_space(e, file, problems);
    } else {
      problems.push_back("unknown fixture kind '" + e.kind + "'");
    }
  } catch (std::exception const &ex) {
    problems.push_back(ex.what());
  }
  chk.pass = problems.empty();
  for (auto const &p : problems) {
    chk.message += (chk.message.empty() ? "" : "; ") + p;
  }
  if (chk.pass) {
    chk.message = "ok";
  }
  return chk;
}

std::vector<FixtureCheck> check_all_fixtures(std::filesystem::path const &root)
{
  std::vector<FixtureCheck> out;
  json const manifest = load_manifest(root);
  for (auto const &f : manifest.at("fixtures")) {
    out.push_back(fixture_selfcheck(f.at("name").get<std::string>(), root));
  }
  FixtureCheck regen{"generator", true, "ok"};
  auto const cat = fixture_catalog();
  std::string drift;
  for (auto const &e : cat) {
    std::string on_disk;
    try {
      on_disk = read_file(root / e.path);
    } catch (IoError const &) {
    }
    if (on_disk != e.content) {
      drift += (drift.empty() ? "" : ", ") + e.name;
    }
  }
  try {
    if (read_file(root / "manifest.json") != dump(manifest_json(cat))) {
      drift += (drift.empty() ? "" : ", ") + std::string("manifest");
    }
  } catch (IoError const &) {
    drift += "manifest";
  }
  if (!drift.empty()) {
    regen.pass = false;
    regen.message = "differs from a fresh generation: " + drift;
  }
  out.push_back(regen);
  return out;
}

} // namespace sgpnp
