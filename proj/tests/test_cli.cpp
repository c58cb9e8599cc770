#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

fs::path const kFixtures = fs::path(SGPNP_SOURCE_DIR) / "fixtures";

struct Result
{
  int code = -1;
  std::string output;
};

fs::path scratch(std::string const &name)
{
  fs::path const p = fs::temp_directory_path() / ("sgpnp_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(fs::path const &p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Result cli(std::string const &args)
{
  fs::path const log = fs::temp_directory_path() / "sgpnp_cli_last.log";
  std::string const cmd = std::string("\"") + SGPNP_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  int const status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = slurp(log);
  return r;
}

std::size_t lines(std::string const &s)
{
  std::size_t n = 0;
  for (char c : s) {
    n += c == '\n' ? 1 : 0;
  }
  return n;
}

} // namespace

TEST_CASE("run writes its three artifacts and is byte-reproducible")
{
  fs::path const a = scratch("run_a"), b = scratch("run_b");
  std::string const cfg = (kFixtures / "configs/minimal.json").string();
  Result const r1 = cli("run -c \"" + cfg + "\" -o \"" + a.string() + "\"");
  INFO(r1.output);
  REQUIRE(r1.code == 0);
  CHECK(fs::exists(a / "run_record.json"));
  CHECK(fs::exists(a / "final.sgp"));
  CHECK(fs::exists(a / "metrics.csv"));
  REQUIRE(cli("run -c \"" + cfg + "\" -o \"" + b.string() + "\"").code == 0);
  CHECK(slurp(a / "run_record.json") == slurp(b / "run_record.json"));
  CHECK(slurp(a / "final.sgp") == slurp(b / "final.sgp"));
  auto const rec = nlohmann::json::parse(slurp(a / "run_record.json"));
  CHECK(rec.at("iterations").size() == 21);
  std::string const csv = slurp(a / "metrics.csv");
  CHECK(csv.rfind("run_id,algorithm,stochastic,K,gamma,tau,sigma_cond_0,sigma_inject_0,seed,psnr,ssim,final_objective,wall_ms\n", 0) == 0);
  CHECK(lines(csv) == 2);
}

TEST_CASE("bad configurations exit with status 2")
{
  fs::path const d = scratch("bad");
  auto j = nlohmann::json::parse(slurp(kFixtures / "configs/minimal.json"));
  j["solver"]["momentum"] = 0.9;
  std::ofstream(d / "bad.json") << j.dump();
  Result const r = cli("run -c \"" + (d / "bad.json").string() + "\" -o \"" + (d / "out").string() + "\"");
  CHECK(r.code == 2);
  CHECK(r.output.find("solver.momentum") != std::string::npos);
  CHECK(cli("run -c \"" + (d / "missing.json").string() + "\"").code == 2);
  CHECK(cli("frobnicate").code == 2);
}

TEST_CASE("verify passes clean suites and fails under an injected fault")
{
  Result const ok = cli("verify tweedie");
  INFO(ok.output);
  CHECK(ok.code == 0);
  CHECK(ok.output.find("suite tweedie: PASS") != std::string::npos);
  Result const bad = cli("verify tweedie --fault 1e-3");
  CHECK(bad.code == 4);
  CHECK(bad.output.find("FAIL") != std::string::npos);
  CHECK(cli("verify no-such-suite").code == 2);
  fs::path const d = scratch("verify");
  REQUIRE(cli("verify schedules -o \"" + (d / "report.json").string() + "\"").code == 0);
  auto const rep = nlohmann::json::parse(slurp(d / "report.json"));
  CHECK(rep.dump().find("schedules") != std::string::npos);
}

TEST_CASE("sweep evaluates every cell and resumes from finished cells")
{
  fs::path const d = scratch("sweep");
  std::string const space = (kFixtures / "spaces/sweep-2x2.json").string();
  Result const first = cli("sweep -c \"" + space + "\" -o \"" + d.string() + "\"");
  INFO(first.output);
  REQUIRE(first.code == 0);
  CHECK(first.output.find("cells: 4 (0 cached)") != std::string::npos);
  CHECK(lines(slurp(d / "sweep.csv")) == 5);
  CHECK(fs::exists(d / "best_config.json"));
  std::string const csv = slurp(d / "sweep.csv");
  Result const second = cli("sweep -c \"" + space + "\" -o \"" + d.string() + "\"");
  CHECK(second.code == 0);
  CHECK(second.output.find("cells: 4 (4 cached)") != std::string::npos);
  CHECK(slurp(d / "sweep.csv") == csv);
  fs::remove(d / "cells" / "cell-00002.json");
  CHECK(cli("sweep -c \"" + space + "\" -o \"" + d.string() + "\"").output.find("cells: 4 (3 cached)") != std::string::npos);
}

TEST_CASE("ablate writes paired columns")
{
  fs::path const d = scratch("ablate");
  Result const r = cli("ablate detvsstoch -c \"" + (kFixtures / "configs/masked16-admm.json").string() + "\" -o \"" + d.string() + "\"");
  INFO(r.output);
  REQUIRE(r.code == 0);
  std::string const csv = slurp(d / "ablation_detvsstoch.csv");
  CHECK(csv.rfind("trial,psnr_deterministic,psnr_stochastic,objective_deterministic,objective_stochastic", 0) == 0);
  CHECK(lines(csv) == 51);
  auto const rep = nlohmann::json::parse(slurp(d / "ablation_detvsstoch.json"));
  CHECK(rep.contains("win_rate_b"));
  CHECK(cli("ablate sideways -c \"" + (kFixtures / "configs/masked16-admm.json").string() + "\"").code == 2);
}

TEST_CASE("fixture check detects a flipped byte")
{
  fs::path const d = scratch("fixtures");
  fs::copy(kFixtures, d, fs::copy_options::recursive);
  CHECK(cli("fixtures check --dir \"" + d.string() + "\"").code == 0);
  fs::path const victim = d / "priors/bimodal-1d.json";
  std::string bytes = slurp(victim);
  auto const pos = bytes.find('3');
  REQUIRE(pos != std::string::npos);
  bytes[pos] = '4';
  std::ofstream(victim, std::ios::binary) << bytes;
  Result const r = cli("fixtures check bimodal-1d --dir \"" + d.string() + "\"");
  CHECK(r.code == 4);
  CHECK(r.output.find("FAIL bimodal-1d") != std::string::npos);
  fs::path const fresh = scratch("fixtures_gen");
  REQUIRE(cli("fixtures generate --dir \"" + fresh.string() + "\"").code == 0);
  CHECK(slurp(fresh / "manifest.json") == slurp(kFixtures / "manifest.json"));
}

TEST_CASE("complex subsampled-frequency problem runs end to end")
{
  fs::path const d = scratch("csmri");
  Result const r = cli("run -c \"" + (kFixtures / "hparams/csmri-sgpnp-pgm.json").string() + "\" -o \"" + d.string() + "\"");
  INFO(r.output);
  REQUIRE(r.code == 0);
  auto const rec = nlohmann::json::parse(slurp(d / "run_record.json"));
  CHECK(rec.dump().find("\"pgm\"") != std::string::npos);
}
