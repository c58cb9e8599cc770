#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

fs::path const kRoot = SGPNP_SOURCE_DIR;

std::string slurp(fs::path const &p)
{
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Row
{
  std::string operation, symbol, header;
};

std::vector<Row> map_rows()
{
  std::vector<Row> rows;
  std::istringstream in(slurp(kRoot / "docs/operation_map.md"));
  std::regex const row(R"(^\|\s*([^|]+?)\s*\|.*\|\s*`([A-Za-z_0-9]+)`\s*\|\s*`([a-z_]+\.hpp)`\s*\|\s*$)");
  for (std::string line; std::getline(in, line);) {
    std::smatch m;
    if (std::regex_match(line, m, row)) {
      rows.push_back({m[1], m[2], m[3]});
    }
  }
  return rows;
}

} // namespace

TEST_CASE("every mapped symbol is declared in its header")
{
  auto const rows = map_rows();
  REQUIRE(rows.size() >= 60);
  for (auto const &r : rows) {
    INFO(r.operation << " -> " << r.symbol << " in " << r.header);
    fs::path const h = kRoot / "include/sgpnp" / r.header;
    REQUIRE(fs::exists(h));
    std::regex const word("\\b" + r.symbol + "\\b");
    CHECK(std::regex_search(slurp(h), word));
  }
}

TEST_CASE("every public header appears in the map")
{
  std::set<std::string> mapped;
  std::set<std::string> ops;
  for (auto const &r : map_rows()) {
    mapped.insert(r.header);
    CHECK_MESSAGE(ops.insert(r.operation).second, "duplicate operation " << r.operation);
  }
  for (auto const &e : fs::directory_iterator(kRoot / "include/sgpnp")) {
    INFO(e.path().filename().string());
    CHECK(mapped.count(e.path().filename().string()) == 1);
  }
}
