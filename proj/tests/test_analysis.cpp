#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sgpnp/analysis.hpp"
#include "sgpnp/error.hpp"
#include "sgpnp/quadrature.hpp"
#include "sgpnp/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdlib>
#include <numbers>

using namespace sgpnp;
using Eigen::VectorXd;

namespace {

// Prior N(m, c I_d): every smoothed quantity is closed form.
struct Gauss
{
  VectorXd m;
  double c;
  GmmPrior prior() const
  {
    std::vector<double> var{c};
    return GmmPrior::isotropic({1.0}, {m}, var);
  }
  double h(VectorXd const &x, double s) const
  {
    double const v = c + s * s;
    auto const d = double(x.size());
    return 0.5 * d * std::log(2.0 * std::numbers::pi * v) + ((x - m).squaredNorm() + d * s * s) / (2.0 * v);
  }
  VectorXd grad(VectorXd const &x, double s) const { return (x - m) / (c + s * s); }
};

Signal sig(VectorXd const &v) { return Signal({std::size_t(v.size())}, std::vector<double>(v.data(), v.data() + v.size())); }

GmmPrior bimodal_1d() { return GmmPrior::isotropic({0.5, 0.5}, {VectorXd::Constant(1, -3), VectorXd::Constant(1, 3)}, {0.25, 0.25}); }

} // namespace

TEST_CASE("gauss-hermite rule integrates polynomials exactly")
{
  for (std::size_t order : {1u, 2u, 5u, 10u, 20u, 32u, 48u}) {
    auto const r = gauss_hermite(order);
    REQUIRE(r.nodes.size() == order);
    double const want[] = {1, 0, 1, 0, 3, 0, 15, 0, 105};
    for (std::size_t p = 0; p < 9 && p < 2 * order; ++p) {
      double acc = 0.0;
      for (std::size_t i = 0; i < order; ++i) {
        acc += r.weights[i] * std::pow(r.nodes[i], double(p));
      }
      CHECK(acc == doctest::Approx(want[p]).epsilon(1e-10).scale(1.0));
    }
  }
}

TEST_CASE("expectations by quadrature and Monte Carlo agree")
{
  auto const f = [](VectorXd const &n) {
    VectorXd out(2);
    out << std::cos(n(0)) * std::exp(0.3 * n(1)), n.squaredNorm();
    return out;
  };
  QuadratureSpec q;
  q.method = ExpectationMethod::Quadrature;
  Estimate const e = gaussian_expectation(2, 2, f, q);
  CHECK(e.quadrature);
  CHECK(e.value(0) == doctest::Approx(std::exp(-0.5) * std::exp(0.045)).epsilon(1e-12));
  CHECK(e.value(1) == doctest::Approx(2.0).epsilon(1e-12));
  Estimate const mc = monte_carlo_mean(2, 2, f, 200000, 9);
  CHECK_FALSE(mc.quadrature);
  for (Eigen::Index i = 0; i < 2; ++i) {
    CHECK(std::abs(mc.value(i) - e.value(i)) < 4.0 * mc.std_error(i));
  }
  QuadratureSpec big = q;
  big.max_quadrature_dim = 2;
  CHECK_THROWS_AS(gaussian_expectation(3, 1, [](VectorXd const &n) { return VectorXd::Constant(1, n(0)); }, big),
                  DomainError);
  QuadratureSpec aut;
  CHECK(aut.use_quadrature(4));
  CHECK_FALSE(aut.use_quadrature(5));
  CHECK(aut.order_for(2) == 32);
  CHECK(aut.order_for(3) == 20);
}

TEST_CASE("Monte Carlo results do not depend on the thread count")
{
  auto const f = [](VectorXd const &n) { return VectorXd::Constant(1, std::sin(n(0)) + n(1) * n(1)); };
  setenv("SGPNP_THREADS", "1", 1);
  Estimate const a = monte_carlo_mean(2, 1, f, 50000, 3);
  MomentStats const ma = monte_carlo_moments(2, [](VectorXd const &n) { return n(0); }, 50000, 3);
  setenv("SGPNP_THREADS", "4", 1);
  Estimate const b = monte_carlo_mean(2, 1, f, 50000, 3);
  MomentStats const mb = monte_carlo_moments(2, [](VectorXd const &n) { return n(0); }, 50000, 3);
  unsetenv("SGPNP_THREADS");
  CHECK(a.value(0) == b.value(0));
  CHECK(a.std_error(0) == b.std_error(0));
  CHECK(ma.variance == mb.variance);
  CHECK(ma.variance == doctest::Approx(1.0).epsilon(0.03));
  CHECK(ma.fourth_central == doctest::Approx(3.0).epsilon(0.1));
}

TEST_CASE("smoothed regularizer of a Gaussian prior is closed form")
{
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t const d = 1 + std::size_t(trial % 3);
    Gauss const g{VectorXd::Random(Eigen::Index(d)), 0.3 + rng.uniform()};
    GmmPrior const p = g.prior();
    VectorXd const x = 2.0 * VectorXd::Random(Eigen::Index(d));
    for (double s : {0.0, 0.2, 1.0, 3.0}) {
      ScalarEstimate const h = h_sigma(p, sig(x), s);
      CHECK(h.value == doctest::Approx(g.h(x, s)).epsilon(1e-10));
      Estimate const gr = grad_h_sigma(p, sig(x), s);
      CHECK((gr.value - g.grad(x, s)).norm() < 1e-10);
      Eigen::MatrixXd const H = hess_h_sigma(p, sig(x), s);
      CHECK((H - Eigen::MatrixXd::Identity(x.size(), x.size()) / (g.c + s * s)).norm() < 1e-10);
    }
    QuadratureSpec mc;
    mc.method = ExpectationMethod::MonteCarlo;
    mc.mc_samples = 50000;
    ScalarEstimate const h = h_sigma(p, sig(x), 0.7, mc);
    CHECK(std::abs(h.value - g.h(x, 0.7)) < 4.0 * h.std_error);
  }
}

TEST_CASE("expected U equals the closed-form regularizer gradient")
{
  Gauss const g{VectorXd::Constant(2, 0.5), 0.8};
  GmmDenoiser const den(g.prior());
  VectorXd x(2);
  x << 1.5, -2.0;
  for (double s : {0.3, 1.0, 2.5}) {
    Estimate const e = expected_u_sigma(den, sig(x), s);
    CHECK((e.value - g.grad(x, s)).norm() < 1e-10);
    Signal const n = sig(VectorXd::Constant(2, 0.4));
    Signal const u = u_sigma(den, sig(x), s, n);
    VectorXd const direct = (x - den.denoise(sig(x + s * n.vec()), s).vec()) / (s * s);
    CHECK((u.vec() - direct).norm() < 1e-12);
    Signal const w = w_k(den, g.prior(), sig(x), s, n);
    CHECK((w.vec() - (direct - g.grad(x, s))).norm() < 1e-10);
  }
}

TEST_CASE("smoothed objective derivatives match finite differences")
{
  GmmPrior const p = GmmPrior::isotropic({0.3, 0.7}, {VectorXd::Constant(2, -1), VectorXd::Constant(2, 1.5)}, {0.4, 0.6});
  FidelityProblem const fid(LinearOperator::mask(Signal({2}, std::vector<double>{1, 0})), Signal({2}, std::vector<double>{0.5, 0}));
  SmoothedObjective const f(p, fid, 0.5);
  Rng rng(2);
  for (int i = 0; i < 10; ++i) {
    Signal const x = gaussian(rng, {2});
    Signal const g = f.gradient(x);
    Eigen::MatrixXd const H = f.hessian(x);
    double const h = 1e-5;
    for (std::size_t a = 0; a < 2; ++a) {
      Signal e({2});
      e[a] = h;
      CHECK(g[a] == doctest::Approx((f.value(x + e) - f.value(x - e)) / (2 * h)).epsilon(1e-6));
      Signal const col = scale(1.0 / (2 * h), f.gradient(x + e) - f.gradient(x - e));
      CHECK(std::abs(H(0, Eigen::Index(a)) - col[0]) < 1e-5);
      CHECK(std::abs(H(1, Eigen::Index(a)) - col[1]) < 1e-5);
    }
  }
  CHECK(f.with_sigma(0.1).sigma() == 0.1);
}

TEST_CASE("saddle search classifies the bimodal midpoint and a Gaussian minimum")
{
  SmoothedObjective const bi(bimodal_1d(), std::nullopt, 0.5);
  SaddleReport const s = find_saddle(bi, Signal({1}, std::vector<double>{0.05}));
  CHECK(s.kind == CriticalKind::StrictSaddle);
  CHECK(std::abs(s.point[0]) < 1e-10);
  CHECK(s.lambda_min < 0.0);
  CHECK(std::abs(s.direction[0]) == doctest::Approx(1.0));
  CHECK(s.grad_norm <= 1e-10);

  Gauss const g{VectorXd::Constant(2, 1.0), 0.5};
  SmoothedObjective const ga(g.prior(), std::nullopt, 0.3);
  SaddleReport const m = find_saddle(ga, Signal({2}, std::vector<double>{0.0, 3.0}));
  CHECK(m.kind == CriticalKind::LocalMin);
  CHECK(std::abs(m.point[0] - 1.0) < 1e-10);
  CHECK(m.lambda_min == doctest::Approx(1.0 / (0.5 + 0.09)));
  CHECK(classify_point(ga, Signal({2}, std::vector<double>{0.0, 0.0})).kind == CriticalKind::NonStationary);

  CncReport const c = cnc_check(GmmDenoiser(bimodal_1d()), s, 0.5, 20000, 3);
  CHECK(c.pass);
  CHECK(c.variance > c.threshold);
  CHECK_THROWS_AS(cnc_check(GmmDenoiser(g.prior()), m, 0.5, 100, 3), DomainError);
}

TEST_CASE("annealed minimization tracks the Gaussian closed form")
{
  Gauss const g{VectorXd::Constant(1, -1.0), 0.5};
  FidelityProblem const fid(LinearOperator::mask(Signal({1}, std::vector<double>{1})), Signal({1}, std::vector<double>{1.0}));
  std::vector<double> const sigmas{1.0, 0.5, 0.1, 0.001};
  AnnealReport const r = anneal_consistency(g.prior(), fid, sigmas, Signal({1}, std::vector<double>{3.0}));
  REQUIRE(r.stages.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    double const v = g.c + sigmas[i] * sigmas[i];
    double const want = (1.0 * v - 1.0) / (v + 1.0);
    CHECK(r.stages[i].x[0] == doctest::Approx(want).epsilon(1e-6));
    CHECK(r.stages[i].grad_norm <= 1e-6);
    AnnealOptions o;
    double const gap = 6.0 * sigmas[i] * sigmas[i] / (g.c * v);
    CHECK(r.stages[i].gradient_gap == doctest::Approx(gap).epsilon(1e-8));
    CHECK(gradient_gap(g.prior(), sigmas[i], o) == doctest::Approx(gap).epsilon(1e-8));
  }
  CHECK(r.gap_monotone);
  CHECK(r.final_grad_f0 < 1e-5);
  CHECK_THROWS_AS(anneal_consistency(g.prior(), fid, {1.0, 0.1}, Signal({1}, std::vector<double>{3.0})), DomainError);
}

TEST_CASE("variance and curvature scans of a Gaussian prior")
{
  Gauss const g{VectorXd::Zero(2), 0.5};
  GmmDenoiser const den(g.prior());
  std::vector<Signal> const pts{sig(VectorXd::Zero(2)), sig(VectorXd::Constant(2, 1.0))};
  double const s = 0.7;
  double const a = g.c / (g.c + s * s);
  double const trace = 2.0 * a * a / (s * s);
  CHECK(variance_scan(den, pts, s, 40000, 4) == doctest::Approx(trace).epsilon(0.03));
  SmoothedObjective const f(g.prior(), std::nullopt, s);
  CHECK(lipschitz_scan(f, pts) == doctest::Approx(1.0 / (g.c + s * s)));
}
