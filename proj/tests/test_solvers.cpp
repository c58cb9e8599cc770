#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sgpnp/error.hpp"
#include "sgpnp/grid_search.hpp"
#include "sgpnp/rng.hpp"
#include "sgpnp/solvers.hpp"

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace sgpnp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Linear-Gaussian world: prior N(m, c I), dense A. The MMSE denoiser is the
// affine shrinkage m + c / (c + sigma^2) (x - m).
struct World
{
  MatrixXd A;
  VectorXd y;
  VectorXd m;
  double c = 0.0;
  std::size_t n() const { return std::size_t(A.cols()); }

  VectorXd denoise(VectorXd const &x, double s) const { return m + c / (c + s * s) * (x - m); }
  VectorXd prox(VectorXd const &z, double g) const
  {
    MatrixXd const M = MatrixXd::Identity(A.cols(), A.cols()) + g * A.transpose() * A;
    return M.ldlt().solve(z + g * A.transpose() * y);
  }
  GmmPrior prior() const
  {
    std::vector<double> var{c};
    return GmmPrior::isotropic({1.0}, {m}, var);
  }
  FidelityProblem problem() const
  {
    return FidelityProblem(LinearOperator::dense(A), Signal({std::size_t(y.size())}, std::vector<double>(y.data(), y.data() + y.size())));
  }
};

World random_world(Rng &rng, std::size_t n, std::size_t rows)
{
  World w;
  w.A = MatrixXd(Eigen::Index(rows), Eigen::Index(n));
  for (Eigen::Index i = 0; i < w.A.size(); ++i) {
    w.A.data()[i] = rng.normal() / std::sqrt(double(n));
  }
  w.y = VectorXd(Eigen::Index(rows));
  w.m = VectorXd(Eigen::Index(n));
  for (Eigen::Index i = 0; i < w.y.size(); ++i) {
    w.y(i) = rng.normal();
  }
  for (Eigen::Index i = 0; i < w.m.size(); ++i) {
    w.m(i) = rng.normal();
  }
  w.c = 0.5 + rng.uniform();
  return w;
}

VectorXd to_vec(Signal const &s) { return s.vec(); }


SolverConfig config(Algorithm a, std::size_t K, double cond0, double inject0, std::uint64_t seed)
{
  SolverConfig c;
  c.algorithm = a;
  c.iterations = K;
  c.gamma = 0.8;
  c.tau = 0.5;
  c.cond = make_plan(cond0, cond0 * 0.1, K);
  c.inject = make_plan(inject0, inject0 * 0.1, K);
  c.seed = seed;
  return c;
}

// Hand-written reference of each iteration with its own noise stream.
VectorXd reference(World const &w, SolverConfig const &cfg, VectorXd x)
{
  Rng rng(cfg.seed);
  auto draw = [&] {
    VectorXd n(x.size());
    for (Eigen::Index i = 0; i < n.size(); ++i) {
      n(i) = rng.normal();
    }
    return n;
  };
  VectorXd s = VectorXd::Zero(x.size());
  for (std::size_t k = 0; k < cfg.iterations; ++k) {
    double const g = cfg.gamma.at(k), t = cfg.tau_at(k), sc = cfg.cond[k], si = cfg.inject[k];
    switch (cfg.algorithm) {
    case Algorithm::Admm: {
      VectorXd const z = w.prox(x - s, g);
      VectorXd const next = w.denoise(s + z + si * draw(), sc);
      s += z - next;
      x = next;
      break;
    }
    case Algorithm::Pgm: {
      VectorXd const d = w.denoise(x + si * draw(), sc);
      x = w.prox(x, g) - g * t * (x - d);
      break;
    }
    case Algorithm::Red: {
      VectorXd const d = w.denoise(x + si * draw(), sc);
      x = x - g * (w.A.transpose() * (w.A * x - w.y) + t * (x - d));
      break;
    }
    case Algorithm::Hqs: {
      VectorXd const z = w.prox(x, g);
      x = w.denoise(z + si * draw(), sc);
      break;
    }
    }
  }
  return x;
}

} // namespace

TEST_CASE("every solver reproduces an independent linear-Gaussian reference")
{
  Rng rng(1);
  for (Algorithm a : {Algorithm::Admm, Algorithm::Pgm, Algorithm::Red, Algorithm::Hqs}) {
    for (int trial = 0; trial < 10; ++trial) {
      std::size_t const n = 2 + std::size_t(rng.uniform() * 5);
      World const w = random_world(rng, n, n);
      GmmDenoiser const den(w.prior());
      auto const problem = w.problem();
      bool const stoch = trial % 2 == 1;
      SolverConfig cfg = config(a, 30, 0.5, stoch ? 0.3 : 0.0, 100 + std::uint64_t(trial));
      if (a == Algorithm::Red) {
        cfg.gamma = 0.2;
      }
      RunRecord const rec = run_solver(cfg, problem, den);
      VectorXd const want = reference(w, cfg, to_vec(problem.initial_point()));
      CHECK((to_vec(rec.final) - want).norm() < 1e-10 * (1.0 + want.norm()));
      CHECK(rec.iterations.size() == 31);
      CHECK(rec.algorithm == a);
    }
  }
}

TEST_CASE("deterministic iterations converge to their closed-form fixed points")
{
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    World const w = random_world(rng, 4, 3);
    GmmDenoiser const den(w.prior());
    auto const problem = w.problem();
    double const s = 0.6, g = 0.8, t = 0.5;
    double const a = w.c / (w.c + s * s);
    MatrixXd const I = MatrixXd::Identity(4, 4);
    MatrixXd const AtA = w.A.transpose() * w.A;
    VectorXd const Aty = w.A.transpose() * w.y;
    MatrixXd const P = (I + g * AtA).inverse();

    SolverConfig cfg = config(Algorithm::Hqs, 400, s, 0.0, 1);
    cfg.cond = AnnealPlan::constant(s, 400);
    cfg.gamma = g;
    cfg.tau = t;

    // HQS: x = m + a (P (x + g A^T y) - m)
    VectorXd const hqs = (I - a * P).ldlt().solve((1 - a) * w.m + a * g * P * Aty);
    CHECK((to_vec(run_hqs(cfg, problem, den).final) - hqs).norm() < 1e-9);

    // ADMM: z = x, x - m = a (u + x - m), x = P(x - u + g A^T y), so u = b (x - m)
    // with b = (1 - a) / a.
    cfg.algorithm = Algorithm::Admm;
    double const beta = (1 - a) / a;
    VectorXd const admm = (I - (1 - beta) * P).ldlt().solve(P * (beta * w.m + g * Aty));
    RunRecord const ar = run_admm(cfg, problem, den);
    CHECK((to_vec(ar.final) - admm).norm() < 1e-9);
    CHECK(ar.iterations.back().primal_residual.value() < 1e-9);

    // RED: A^T (A x - y) + t (1 - a)(x - m) = 0
    cfg.algorithm = Algorithm::Red;
    cfg.gamma = 0.3;
    cfg.iterations = 4000;
    cfg.cond = AnnealPlan::constant(s, 4000);
    cfg.inject = AnnealPlan::zeros(4000);
    VectorXd const red = (AtA + t * (1 - a) * I).ldlt().solve(Aty + t * (1 - a) * w.m);
    CHECK((to_vec(run_red(cfg, problem, den).final) - red).norm() < 1e-9);

    // PGM in listing order: x = P (x + g A^T y) - g t (1 - a)(x - m)
    cfg.algorithm = Algorithm::Pgm;
    cfg.gamma = g;
    cfg.iterations = 400;
    cfg.cond = AnnealPlan::constant(s, 400);
    cfg.inject = AnnealPlan::zeros(400);
    VectorXd const pgm = (I - P + g * t * (1 - a) * I).ldlt().solve(g * P * Aty + g * t * (1 - a) * w.m);
    CHECK((to_vec(run_pgm(cfg, problem, den).final) - pgm).norm() < 1e-9);
  }
}

TEST_CASE("same seed gives identical records; a deterministic twin shares the stream")
{
  Rng rng(3);
  World const w = random_world(rng, 5, 5);
  GmmDenoiser const den(w.prior());
  auto const problem = w.problem();
  SolverConfig cfg = config(Algorithm::Admm, 20, 0.5, 0.3, 77);
  RunRecord const a = run_solver(cfg, problem, den);
  RunRecord const b = run_solver(cfg, problem, den);
  CHECK(a.to_json().dump() == b.to_json().dump());
  CHECK(a.final == b.final);
  cfg.seed = 78;
  CHECK(run_solver(cfg, problem, den).final != a.final);

  SolverConfig twin = config(Algorithm::Admm, 20, 0.5, 0.0, 77);
  SolverConfig other = twin;
  other.seed = 12345;
  CHECK(run_solver(twin, problem, den).final == run_solver(other, problem, den).final);
  CHECK_FALSE(twin.stochastic());
  CHECK(cfg.stochastic());
}

TEST_CASE("records log the objective, its gradient and the schedule")
{
  Rng rng(4);
  World const w = random_world(rng, 3, 3);
  GmmPrior const prior = w.prior();
  GmmDenoiser const den(prior);
  auto const problem = w.problem();
  SolverConfig cfg = config(Algorithm::Pgm, 10, 1.0, 0.5, 5);
  cfg.keep_iterates = true;
  RunRecord const rec = run_solver(cfg, problem, den);
  REQUIRE(rec.iterates.size() == 11);
  for (std::size_t k = 0; k <= 10; ++k) {
    auto const &it = rec.iterations[k];
    CHECK(it.k == k);
    CHECK(it.hash == hash(rec.iterates[k]));
    CHECK(it.objective.value() == doctest::Approx(map_objective(problem, prior, rec.iterates[k])));
    if (k > 0) {
      CHECK(it.sigma_cond == cfg.cond[k - 1]);
      CHECK(it.sigma_inject == cfg.inject[k - 1]);
    }
  }
  CHECK(rec.final_objective().value() == rec.iterations.back().objective.value());
  CHECK(rec.wall_ms.size() == 10);
  CHECK_FALSE(rec.to_json().dump().find("wall") != std::string::npos);
}

TEST_CASE("map objective gradient matches finite differences")
{
  Rng rng(5);
  World const w = random_world(rng, 4, 2);
  GmmPrior const prior = GmmPrior::isotropic({0.3, 0.7}, {w.m, -w.m}, {0.4, 0.9});
  auto const problem = w.problem();
  for (int i = 0; i < 10; ++i) {
    Signal const x = gaussian(rng, {4});
    Signal const v = gaussian(rng, {4});
    double const h = 1e-6;
    double const fd = (map_objective(problem, prior, axpy(h, v, x)) - map_objective(problem, prior, axpy(-h, v, x))) / (2 * h);
    CHECK(fd == doctest::Approx(dot(map_objective_gradient(problem, prior, x), v)).epsilon(1e-6));
    VectorXd const xv = to_vec(x);
    double const direct = 0.5 * (w.y - w.A * xv).squaredNorm() - prior.logpdf(xv, 0.0);
    CHECK(map_objective(problem, prior, x) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("pgm orders differ and gradient-then-prox matches its formula")
{
  Rng rng(6);
  World const w = random_world(rng, 3, 3);
  GmmDenoiser const den(w.prior());
  auto const problem = w.problem();
  SolverConfig cfg = config(Algorithm::Pgm, 1, 0.5, 0.0, 1);
  cfg.pgm_order = PgmOrder::GradientThenProx;
  VectorXd const x0 = to_vec(problem.initial_point());
  VectorXd const want = w.prox(x0 - 0.8 * 0.5 * (x0 - w.denoise(x0, 0.5)), 0.8);
  CHECK((to_vec(run_pgm(cfg, problem, den).final) - want).norm() < 1e-12);
}

TEST_CASE("tau = sigma^-2 schedule")
{
  SolverConfig cfg = config(Algorithm::Red, 5, 0.5, 0.0, 1);
  cfg.tau_inverse_sigma2 = true;
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(cfg.tau_at(k) == doctest::Approx(1.0 / (cfg.cond[k] * cfg.cond[k])));
  }
}

TEST_CASE("configuration validation and runtime errors")
{
  SolverConfig cfg = config(Algorithm::Hqs, 5, 0.5, 0.1, 1);
  cfg.gamma = -1.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg.gamma = std::vector<double>{1.0, 1.0};
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg.gamma = 1.0;
  cfg.cond = make_plan(0.5, 0.1, 4);
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  CHECK_THROWS_AS(algorithm_from_string("lbfgs"), DomainError);
  CHECK(algorithm_from_string(to_string(Algorithm::Red)) == Algorithm::Red);

  // A diverging RED step produces non-finite iterates.
  Rng rng(7);
  World w = random_world(rng, 3, 3);
  w.A *= 1e3;
  GmmDenoiser const den(w.prior());
  auto const problem = w.problem();
  SolverConfig bad = config(Algorithm::Red, 500, 0.5, 0.0, 1);
  bad.gamma = 10.0;
  CHECK_THROWS_AS(run_red(bad, problem, den), SolverError);

  SolverConfig wrong = config(Algorithm::Hqs, 3, 0.5, 0.0, 1);
  wrong.init = Signal({7});
  CHECK_THROWS_AS(run_hqs(wrong, problem, den), ShapeError);
}

TEST_CASE("lattices")
{
  auto const l = uniform_lattice(0.01, 5.0, 40);
  REQUIRE(l.size() == 40);
  CHECK(l.front() == 0.01);
  CHECK(l.back() == 5.0);
  for (std::size_t i = 1; i < l.size(); ++i) {
    CHECK(l[i] - l[i - 1] == doctest::Approx((5.0 - 0.01) / 39.0));
  }
  CHECK(uniform_lattice(2.0, 2.0, 1) == std::vector<double>{2.0});
}

TEST_CASE("grid search enumerates, scores, reuses and breaks ties")
{
  GridSpace const space = GridSpace::from_json(nlohmann::json::parse(R"({"axes": [
      {"name": "a", "values": [1, 2, 3]},
      {"name": "b", "lattice": {"lo": 0, "hi": 1, "n": 2}}]})"));
  REQUIRE(space.cells() == 6);
  CHECK(space.cell(0) == nlohmann::json({{"a", 1}, {"b", 0.0}}));
  CHECK(space.cell(1) == nlohmann::json({{"a", 1}, {"b", 1.0}}));
  CHECK(space.cell(5) == nlohmann::json({{"a", 3}, {"b", 1.0}}));

  std::atomic<int> calls = 0;
  auto eval = [&](nlohmann::json const &p) {
    calls++;
    double const a = p.at("a").get<double>(), b = p.at("b").get<double>();
    return CellMetrics{-(a - 2) * (a - 2) - b, b};
  };
  GridSearchResult const r = grid_search(space, eval);
  CHECK(calls.load() == 6);
  CHECK(r.best_cell().params == space.cell(2));

  ScoreWeights const flat{0.0, 0.0};
  CHECK(grid_search(space, eval, flat).best == 0);

  calls = 0;
  std::atomic<int> completed = 0;
  GridSearchHooks hooks;
  hooks.lookup = [](std::size_t i, nlohmann::json const &) -> std::optional<CellMetrics> {
    if (i % 2 == 0) {
      return CellMetrics{100.0 + double(i), 0.0};
    }
    return std::nullopt;
  };
  hooks.on_complete = [&](CellResult const &) { completed++; };
  GridSearchResult const cached = grid_search(space, eval, {}, hooks);
  CHECK(calls.load() == 3);
  CHECK(completed.load() == 3);
  CHECK(cached.best == 4);
  CHECK(cached.cells[4].cached);
  CHECK_FALSE(cached.cells[1].cached);

  auto const path = std::filesystem::temp_directory_path() / "sgpnp_grid.csv";
  write_grid_csv(space, r, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "index,a,b,psnr,objective,score");
  int rows = 0;
  for (std::string line; std::getline(in, line);) {
    rows++;
  }
  CHECK(rows == 6);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(grid_search(GridSpace(std::vector<GridAxis>{}), eval), DomainError);
}
