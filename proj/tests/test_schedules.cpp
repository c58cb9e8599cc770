#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sgpnp/error.hpp"
#include "sgpnp/rng.hpp"
#include "sgpnp/schedules.hpp"

#include <cmath>

using namespace sgpnp;

TEST_CASE("geometric VE table")
{
  auto const s = NoiseSchedule::ve_geometric(0.01, 50.0, 100);
  REQUIRE(s.steps() == 100);
  CHECK(s.rho(1) == doctest::Approx(0.01));
  CHECK(s.rho(100) == doctest::Approx(50.0));
  double const ratio = std::pow(5000.0, 1.0 / 99.0);
  for (std::size_t t = 1; t < 100; ++t) {
    CHECK(s.rho_table()[t] / s.rho_table()[t - 1] == doctest::Approx(ratio).epsilon(1e-12));
  }
  CHECK(s.min_rho() == doctest::Approx(0.01));
  CHECK(s.max_rho() == doctest::Approx(50.0));
}

TEST_CASE("linear VP table equals a long-double recursion")
{
  auto const s = NoiseSchedule::vp_linear(1e-4, 0.02, 1000);
  long double abar = 1.0L;
  for (std::size_t t = 1; t <= 1000; ++t) {
    long double const beta = 1e-4L + (0.02L - 1e-4L) * (long double)(t - 1) / 999.0L;
    abar *= 1.0L - beta;
    double const want = double(std::sqrt((1.0L - abar) / abar));
    CHECK(s.rho(double(t)) == doctest::Approx(want).epsilon(1e-10));
    CHECK(s.alpha_bar(double(t)) == doctest::Approx(double(abar)).epsilon(1e-10));
  }
  CHECK(s.kind() == ScheduleKind::VariancePreserving);
  CHECK(s.increasing());
}

TEST_CASE("continuous VP mean factor is 1 / (1 + rho^2)")
{
  auto const s = NoiseSchedule::vp_linear(1e-4, 0.02, 500);
  for (double t : {1.0, 1.5, 17.25, 250.0, 499.9}) {
    double const r = s.rho(t);
    CHECK(s.alpha_bar(t) == doctest::Approx(1.0 / (1.0 + r * r)).epsilon(1e-12));
  }
}

TEST_CASE("inversion is a right inverse of rho over the whole range")
{
  Rng rng(1);
  for (auto const &s : {NoiseSchedule::ve_geometric(0.01, 50, 100), NoiseSchedule::vp_linear(1e-4, 0.02, 1000),
                        NoiseSchedule::ve_tabulated({5.0, 3.0, 1.0, 0.5})}) {
    for (int i = 0; i < 200; ++i) {
      double const sigma = std::exp(std::log(s.min_rho()) + (std::log(s.max_rho()) - std::log(s.min_rho())) * rng.uniform());
      double const t = invert_rho(s, sigma);
      CHECK(t >= 1.0);
      CHECK(t <= double(s.steps()));
      CHECK(std::abs(rho(s, t) - sigma) <= 1e-9 * sigma);
    }
    CHECK_THROWS_AS(s.invert(s.max_rho() * 1.01), DomainError);
    CHECK_THROWS_AS(s.invert(s.min_rho() * 0.99), DomainError);
  }
  auto const dec = NoiseSchedule::ve_tabulated({5.0, 3.0, 1.0, 0.5});
  CHECK_FALSE(dec.increasing());
  CHECK(dec.invert(3.0) == doctest::Approx(2.0));
  CHECK(dec.invert(2.0) == doctest::Approx(2.5));
}

TEST_CASE("invalid schedules and out-of-range times")
{
  CHECK_THROWS_AS(NoiseSchedule::ve_tabulated({1.0}), DomainError);
  CHECK_THROWS_AS(NoiseSchedule::ve_tabulated({1.0, 2.0, 2.0}), DomainError);
  CHECK_THROWS_AS(NoiseSchedule::ve_geometric(0.0, 1.0, 10), DomainError);
  CHECK_THROWS_AS(NoiseSchedule::vp_tabulated({0.1, 1.0}), DomainError);
  auto const s = NoiseSchedule::ve_geometric(0.1, 1.0, 10);
  CHECK_THROWS_AS(s.rho(0.5), DomainError);
  CHECK_THROWS_AS(s.rho(10.5), DomainError);
}

TEST_CASE("schedule json round trip")
{
  for (auto const &s : {NoiseSchedule::ve_geometric(0.02, 80, 50), NoiseSchedule::vp_linear(1e-4, 0.02, 300),
                        NoiseSchedule::vp_tabulated({0.01, 0.02, 0.05})}) {
    auto const back = NoiseSchedule::from_json(nlohmann::json::parse(s.to_json().dump()));
    CHECK(back.kind() == s.kind());
    CHECK(back.rho_table() == s.rho_table());
  }
  CHECK_THROWS_AS(NoiseSchedule::from_json({{"kind", "cosine"}}), DomainError);
}

TEST_CASE("log annealing is geometric with exact endpoints")
{
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    double const end = std::exp(-6.0 * rng.uniform());
    double const start = end * std::exp(5.0 * rng.uniform());
    std::size_t const K = 2 + std::size_t(rng.uniform() * 200);
    AnnealPlan const p = log_anneal(start, end, K);
    REQUIRE(p.size() == K);
    CHECK(p[0] == doctest::Approx(start).epsilon(1e-15));
    CHECK(p[K - 1] == doctest::Approx(end).epsilon(1e-13));
    for (std::size_t k = 1; k < K; ++k) {
      CHECK(p[k] <= p[k - 1]);
      CHECK(p[k] == doctest::Approx(start * std::pow(end / start, double(k) / double(K - 1))).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(log_anneal(0.1, 1.0, 10), DomainError);
  CHECK_THROWS_AS(log_anneal(1.0, 0.0, 10), DomainError);
  CHECK_THROWS_AS(log_anneal(1.0, 0.5, 1), DomainError);
}

TEST_CASE("configuration plans")
{
  CHECK(make_plan(0.0, 0.0, 10).all_zero());
  CHECK(make_plan(0.0, 0.0, 10).size() == 10);
  AnnealPlan const floor = make_plan(1.0, 0.0, 5);
  CHECK(floor[4] == doctest::Approx(kAnnealFloor));
  AnnealPlan const one = make_plan(0.7, 0.1, 1);
  CHECK(one.size() == 1);
  CHECK(one[0] == 0.7);
  CHECK(AnnealPlan::constant(0.3, 4).values == std::vector<double>(4, 0.3));
  CHECK(AnnealPlan::zeros(3).front() == 0.0);
  CHECK_THROWS_AS(make_plan(-1.0, 0.0, 5), DomainError);
}
