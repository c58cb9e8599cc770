#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sgpnp/denoiser.hpp"
#include "sgpnp/error.hpp"
#include "sgpnp/gmm.hpp"
#include "sgpnp/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

using namespace sgpnp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct RandomMixture
{
  std::vector<double> w;
  std::vector<VectorXd> mu;
  std::vector<MatrixXd> cov;
  GmmPrior prior() const { return GmmPrior(w, mu, cov); }
};

RandomMixture random_mixture(Rng &rng, std::size_t d)
{
  RandomMixture m;
  std::size_t const k = 1 + std::size_t(rng.uniform() * 4);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    m.w.push_back(0.2 + rng.uniform());
    total += m.w.back();
    VectorXd mu{Eigen::Index(d)};
    MatrixXd b{Eigen::Index(d), Eigen::Index(d)};
    for (Eigen::Index a = 0; a < mu.size(); ++a) {
      mu(a) = 2.0 * rng.normal();
    }
    for (Eigen::Index a = 0; a < b.size(); ++a) {
      b.data()[a] = 0.6 * rng.normal();
    }
    m.mu.push_back(mu);
    m.cov.push_back(b * b.transpose() + 0.1 * MatrixXd::Identity(b.rows(), b.rows()));
  }
  for (auto &v : m.w) {
    v /= total;
  }
  return m;
}

VectorXd random_vec(Rng &rng, std::size_t d, double s = 2.0)
{
  VectorXd v{Eigen::Index(d)};
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = s * rng.normal();
  }
  return v;
}

// log sum_i w_i N(x; mu_i, Sigma_i + sigma^2 I) via Cholesky.
double direct_logpdf(RandomMixture const &m, VectorXd const &x, double sigma)
{
  auto const d = double(x.size());
  std::vector<double> terms;
  for (std::size_t i = 0; i < m.w.size(); ++i) {
    MatrixXd const c = m.cov[i] + sigma * sigma * MatrixXd::Identity(x.size(), x.size());
    Eigen::LLT<MatrixXd> llt(c);
    VectorXd const r = llt.matrixL().solve(x - m.mu[i]);
    double logdet = 0.0;
    for (Eigen::Index a = 0; a < x.size(); ++a) {
      logdet += 2.0 * std::log(llt.matrixL()(a, a));
    }
    terms.push_back(std::log(m.w[i]) - 0.5 * (d * std::log(2.0 * std::numbers::pi) + logdet + r.squaredNorm()));
  }
  double const mx = *std::max_element(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) {
    acc += std::exp(t - mx);
  }
  return mx + std::log(acc);
}

} // namespace

TEST_CASE("smoothed log density equals the direct Gaussian convolution")
{
  Rng rng(1);
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t const d = 1 + std::size_t(trial % 4);
    auto const m = random_mixture(rng, d);
    GmmPrior const p = m.prior();
    for (double sigma : {0.0, 0.3, 1.0, 4.0}) {
      VectorXd const x = random_vec(rng, d);
      CHECK(p.logpdf(x, sigma) == doctest::Approx(direct_logpdf(m, x, sigma)).epsilon(1e-10));
    }
  }
}

TEST_CASE("score and its Jacobian match finite differences of the log density")
{
  Rng rng(2);
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t const d = 1 + std::size_t(trial % 3);
    auto const m = random_mixture(rng, d);
    GmmPrior const p = m.prior();
    double const sigma = 0.2 + rng.uniform();
    VectorXd const x = random_vec(rng, d, 1.0);
    VectorXd const s = p.score(x, sigma);
    MatrixXd const J = p.score_jacobian(x, sigma);
    double const h = 1e-5;
    for (Eigen::Index a = 0; a < x.size(); ++a) {
      VectorXd e = VectorXd::Zero(x.size());
      e(a) = h;
      double const fd = (direct_logpdf(m, x + e, sigma) - direct_logpdf(m, x - e, sigma)) / (2 * h);
      CHECK(s(a) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
      VectorXd const col = (p.score(x + e, sigma) - p.score(x - e, sigma)) / (2 * h);
      CHECK((J.col(a) - col).norm() < 1e-5 * (1.0 + col.norm()));
    }
    CHECK((J - J.transpose()).norm() < 1e-10);
  }
}

TEST_CASE("denoiser is Tweedie's formula and the covariance its sigma-scaled Jacobian")
{
  Rng rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t const d = 1 + std::size_t(trial % 4);
    GmmPrior const p = random_mixture(rng, d).prior();
    double const sigma = 0.1 + 2.0 * rng.uniform();
    VectorXd const x = random_vec(rng, d);
    VectorXd const tweedie = x + sigma * sigma * p.score(x, sigma);
    CHECK((p.denoise(x, sigma) - tweedie).norm() < 1e-10 * (1.0 + x.norm()));
    MatrixXd const cov = sigma * sigma * (MatrixXd::Identity(x.size(), x.size()) + sigma * sigma * p.score_jacobian(x, sigma));
    CHECK((p.posterior_cov(x, sigma) - cov).norm() < 1e-9 * (1.0 + cov.norm()));
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(p.posterior_cov(x, sigma));
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
    VectorXd const r = p.responsibilities(x, sigma);
    CHECK(r.sum() == doctest::Approx(1.0));
    CHECK(r.minCoeff() >= 0.0);
  }
}

TEST_CASE("single Gaussian denoiser is the linear Wiener filter")
{
  MatrixXd c(2, 2);
  c << 1.0, 0.3, 0.3, 0.5;
  VectorXd mu(2);
  mu << 0.5, -1.0;
  GmmPrior const p({1.0}, {mu}, {c});
  VectorXd x(2);
  x << 2.0, 1.0;
  double const s = 0.7;
  MatrixXd const k = c * (c + s * s * MatrixXd::Identity(2, 2)).inverse();
  CHECK((p.denoise(x, s) - (mu + k * (x - mu))).norm() < 1e-13);
  CHECK((p.posterior_cov(x, s) - (c - k * c)).norm() < 1e-13);
  CHECK((p.denoise(x, 0.0) - x).norm() < 1e-14);
}

TEST_CASE("isotropic, diagonal and full parameterizations agree")
{
  VectorXd a(2), b(2);
  a << 1, 2;
  b << -1, 0;
  GmmPrior const iso = GmmPrior::isotropic({0.4, 0.6}, {a, b}, {0.5, 2.0});
  VectorXd va(2), vb(2);
  va << 0.5, 0.5;
  vb << 2.0, 2.0;
  GmmPrior const dia = GmmPrior::diagonal({0.4, 0.6}, {a, b}, {va, vb});
  VectorXd vc(2);
  vc << 0.5, 1.5;
  GmmPrior const uneven = GmmPrior::diagonal({0.4, 0.6}, {a, b}, {vc, vb});
  MatrixXd cc = MatrixXd::Zero(2, 2);
  cc.diagonal() = vc;
  GmmPrior const uneven_full({0.4, 0.6}, {a, b}, {cc, 2.0 * MatrixXd::Identity(2, 2)});
  GmmPrior const full({0.4, 0.6}, {a, b}, {0.5 * MatrixXd::Identity(2, 2), 2.0 * MatrixXd::Identity(2, 2)});
  CHECK(iso.covariance_type() == CovarianceType::Isotropic);
  CHECK(dia.covariance_type() == CovarianceType::Isotropic);
  CHECK(uneven.covariance_type() == CovarianceType::Diagonal);
  CHECK(full.covariance_type() == CovarianceType::Isotropic);
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    VectorXd const x = random_vec(rng, 2);
    CHECK(iso.logpdf(x, 0.3) == doctest::Approx(full.logpdf(x, 0.3)).epsilon(1e-12));
    CHECK(dia.logpdf(x, 0.3) == doctest::Approx(full.logpdf(x, 0.3)).epsilon(1e-12));
    CHECK((iso.denoise(x, 0.3) - full.denoise(x, 0.3)).norm() < 1e-12);
    CHECK(uneven.logpdf(x, 0.3) == doctest::Approx(uneven_full.logpdf(x, 0.3)).epsilon(1e-12));
  }
  CHECK((full.global_mean() - (0.4 * a + 0.6 * b)).norm() < 1e-15);
}

TEST_CASE("sample moments match the mixture moments")
{
  Rng rng(5);
  auto const m = random_mixture(rng, 2);
  GmmPrior const p = m.prior();
  VectorXd mean = VectorXd::Zero(2);
  MatrixXd second = MatrixXd::Zero(2, 2);
  for (std::size_t i = 0; i < m.w.size(); ++i) {
    mean += m.w[i] * m.mu[i];
    second += m.w[i] * (m.cov[i] + m.mu[i] * m.mu[i].transpose());
  }
  MatrixXd const cov = second - mean * mean.transpose();
  std::size_t const n = 100000;
  VectorXd s = VectorXd::Zero(2);
  MatrixXd s2 = MatrixXd::Zero(2, 2);
  Rng draw(6);
  for (std::size_t i = 0; i < n; ++i) {
    VectorXd const v = p.sample(draw);
    s += v;
    s2 += v * v.transpose();
  }
  VectorXd const em = s / double(n);
  MatrixXd const ec = s2 / double(n) - em * em.transpose();
  for (Eigen::Index a = 0; a < 2; ++a) {
    CHECK(std::abs(em(a) - mean(a)) < 5.0 * std::sqrt(cov(a, a) / double(n)));
    CHECK(std::abs(ec(a, a) - cov(a, a)) < 0.05 * cov(a, a));
  }
}

TEST_CASE("block-stacked signal helpers act per block")
{
  Rng rng(7);
  GmmPrior const p = random_mixture(rng, 2).prior();
  Signal x = gaussian(rng, {3, 2});
  double total = 0.0;
  Signal const den = gmm_mmse_denoise(p, x, 0.5);
  for (std::size_t b = 0; b < 3; ++b) {
    VectorXd const v = Eigen::Map<VectorXd const>(x.data().data() + 2 * b, 2);
    total += p.logpdf(v, 0.5);
    VectorXd const dv = p.denoise(v, 0.5);
    CHECK(den[2 * b] == doctest::Approx(dv(0)));
    CHECK(den[2 * b + 1] == doctest::Approx(dv(1)));
  }
  CHECK(gmm_smoothed_logpdf(p, x, 0.5) == doctest::Approx(total));
  CHECK(gmm_posterior_cov(p, x, 0.5).rows() == 6);
  CHECK(block_count(p, x) == 3);
  CHECK_THROWS_AS(gmm_mmse_denoise(p, Signal({3}), 0.5), ShapeError);
  Signal const s = gmm_sample(p, rng, {4, 2}, true);
  CHECK(s.size() == 16);
  CHECK(s.is_complex());
}

TEST_CASE("json round trip and strict parsing")
{
  Rng rng(8);
  for (int i = 0; i < 10; ++i) {
    GmmPrior const p = random_mixture(rng, 1 + std::size_t(i % 3)).prior();
    GmmPrior const q = GmmPrior::from_json(nlohmann::json::parse(p.to_json().dump()));
    VectorXd const x = random_vec(rng, p.dim());
    CHECK(q.logpdf(x, 0.4) == doctest::Approx(p.logpdf(x, 0.4)).epsilon(1e-12));
  }
  auto j = GmmPrior::isotropic({1.0}, {VectorXd::Zero(1)}, {1.0}).to_json();
  j["extra"] = 1;
  CHECK_THROWS_AS(GmmPrior::from_json(j), DomainError);
  CHECK_THROWS_AS(GmmPrior::load("/nonexistent/prior.json"), IoError);
}

TEST_CASE("construction and evaluation errors")
{
  VectorXd const z = VectorXd::Zero(2);
  MatrixXd const I = MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(GmmPrior({}, {}, {}), DomainError);
  CHECK_THROWS_AS(GmmPrior({0.5, 0.5}, {z}, {I}), ShapeError);
  CHECK_THROWS_AS(GmmPrior({0.7}, {z}, {I}), DomainError);
  CHECK_THROWS_AS(GmmPrior({-0.5, 1.5}, {z, z}, {I, I}), DomainError);
  MatrixXd asym = I;
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(GmmPrior({1.0}, {z}, {asym}), DomainError);
  CHECK_THROWS_AS(GmmPrior({1.0}, {z}, {-I}), DomainError);
  GmmPrior const p({1.0}, {z}, {I});
  CHECK_THROWS_AS(p.logpdf(VectorXd::Zero(3), 1.0), ShapeError);
  CHECK_THROWS_AS(p.score(z, -1.0), DomainError);
}

TEST_CASE("VE and VP adapters reproduce the MMSE denoiser at matched levels")
{
  Rng rng(9);
  GmmPrior const p = random_mixture(rng, 2).prior();
  auto const ve = std::make_shared<VeAdapter>(std::make_shared<GmmVeScore>(p, NoiseSchedule::ve_geometric(0.01, 50, 200)));
  auto const vp = std::make_shared<VpAdapter>(std::make_shared<GmmVpScore>(p, NoiseSchedule::vp_linear(1e-4, 0.02, 1000)));
  GmmDenoiser const exact(p);
  for (int i = 0; i < 30; ++i) {
    Signal const x = gaussian(rng, {2}, false);
    double const sigma = std::exp(std::log(0.05) + std::log(40.0) * rng.uniform());
    CHECK(max_abs_diff(ve->denoise(x, sigma), exact.denoise(x, sigma)) < 1e-8);
    CHECK(max_abs_diff(vp->denoise(x, sigma), exact.denoise(x, sigma)) < 1e-8);
  }
  CHECK(ve->sigma_min() == doctest::Approx(0.01));
  CHECK_THROWS_AS(ve->denoise(Signal({2}), 100.0), DomainError);
  CHECK_THROWS_AS(GmmVpScore(p, NoiseSchedule::ve_geometric(0.01, 50, 200)), DomainError);
}

TEST_CASE("clamped, biased and perturbed wrappers")
{
  GmmPrior const p = GmmPrior::isotropic({0.5, 0.5}, {VectorXd::Constant(1, -3), VectorXd::Constant(1, 3)}, {0.25, 0.25});
  auto const exact = std::make_shared<GmmDenoiser>(p);
  ClampedDenoiser const c(exact, 0.1, 0.5);
  Signal const x({1}, std::vector<double>{0.7});
  CHECK(c.clamp(2.0) == 0.5);
  CHECK(c.clamp(0.0) == 0.1);
  CHECK(c.clamp(0.3) == 0.3);
  CHECK(c.denoise(x, 9.0) == exact->denoise(x, 0.5));
  CHECK_THROWS_AS(ClampedDenoiser(exact, 0.5, 0.1), DomainError);
  BiasedDenoiser const b(exact, 1e-3);
  CHECK(b.denoise(x, 0.4)[0] == doctest::Approx(exact->denoise(x, 0.4)[0] + 1e-3));
  CHECK(b.exact_prior() == nullptr);
  CHECK(exact->exact_prior() != nullptr);

  auto const inner = std::make_shared<GmmVeScore>(p, NoiseSchedule::ve_geometric(0.01, 50, 100));
  PerturbedScore const ps(inner, 0.01);
  Signal const s0 = inner->evaluate(x, 10.0);
  CHECK(ps.evaluate(x, 10.0)[0] == doctest::Approx(s0[0] + 0.01 * std::tanh(0.7)));
  ZeroScore const zero(NoiseSchedule::ve_geometric(0.01, 50, 100));
  CHECK(max_abs_diff(ve_denoise(zero, x, 5.0), x) == 0.0);
}
