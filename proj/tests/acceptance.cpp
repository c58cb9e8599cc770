// Acceptance run: each criterion maps to one verify suite plus its wall-time
// budget. Prints one line per criterion and exits nonzero if any fails.

#include "sgpnp/verify.hpp"

#include <chrono>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

namespace {

struct Criterion
{
  int id;
  char const *title;
  char const *suite;
  double budget_s;
};

Criterion const kCriteria[] = {
    {1, "denoiser equals Tweedie's formula to 1e-10", "tweedie", 1.0},
    {2, "VE/VP score adapters match the MMSE denoiser to 1e-8", "adapters", 1.0},
    {3, "schedule inversion is a right inverse to 1e-6", "schedules", 1.0},
    {4, "mean denoiser residual is the smoothed gradient within 4 SE", "unbiased", 30.0},
    {5, "sigma^2 times the denoiser Jacobian is the posterior covariance", "miyasawa", 5.0},
    {6, "denoised variance along negative curvature exceeds 0.95 sigma^2", "cnc", 30.0},
    {7, "stochastic RED escapes the saddle, deterministic twin stays", "escape", 60.0},
    {8, "annealed minimization reaches a stationary point of f_0", "anneal", 30.0},
    {9, "closed-form proximal maps match conjugate gradients", "operators", 10.0},
    {10, "stochastic beats deterministic on the masked 16-D problem", "table2", 300.0},
    {11, "clamping the denoiser range lowers escape and worsens f_0", "coverage", 120.0},
    {12, "step-size lattice and hyperparameter configs", "lattice", 60.0},
};

} // namespace

int main()
{
  int failures = 0;
  for (auto const &c : kCriteria) {
    auto const t0 = std::chrono::steady_clock::now();
    bool ok = false;
    std::string note;
    sgpnp::SuiteReport report;
    try {
      report = sgpnp::run_suite(c.suite);
      ok = report.pass();
    } catch (std::exception const &e) {
      note = e.what();
    }
    double const s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool const in_time = s <= c.budget_s;
    bool const pass = ok && in_time;
    failures += pass ? 0 : 1;
    std::printf("criterion %2d %-64s %s  (%.3f s, budget %.0f s)\n", c.id, c.title, pass ? "PASS" : "FAIL", s,
                c.budget_s);
    if (!pass) {
      if (!in_time) {
        std::printf("    over the time budget\n");
      }
      if (!note.empty()) {
        std::printf("    error: %s\n", note.c_str());
      }
      for (auto const &chk : report.checks) {
        if (!chk.pass) {
          std::printf("    %s: %s\n", chk.name.c_str(), chk.details.dump().c_str());
        }
      }
    }
  }
  std::printf("%d of %zu criteria passed\n", int(std::size(kCriteria)) - failures, std::size(kCriteria));
  return failures == 0 ? 0 : 1;
}
