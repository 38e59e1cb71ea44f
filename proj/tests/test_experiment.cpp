#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nehari/errors.hpp"
#include "nehari/experiment.hpp"

using namespace nehari;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json small_solve() {
  return json::parse(R"({
    "task": "solve",
    "domain": {"kind": "disk", "radius": 1.0, "nr": 8, "ntheta": 8},
    "model": {"family": "cubic", "lambda": [1, 1], "beta": 2},
    "seed": 4
  })");
}

std::vector<std::string> issue_paths(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    std::vector<std::string> out;
    for (const auto& i : e.issues()) out.push_back(i.path + " " + i.message);
    return out;
  }
  return {};
}

bool any_contains(const std::vector<std::string>& v, const std::string& s) {
  for (const auto& x : v)
    if (x.find(s) != std::string::npos) return true;
  return false;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("nehari_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("defaults are filled in") {
  const auto c = parse_config(small_solve());
  CHECK(c.task == Task::solve);
  CHECK(c.workers == 1);
  CHECK(c.solver.start_count == 3);
  CHECK(c.solver.tolerance == 1e-10);
  CHECK(c.diffusion == std::vector<double>{1.0, 1.0});
  CHECK(c.potentials.size() == 2);
  REQUIRE(c.model.has_value());
  CHECK(*c.model == cubic_preset({1.0, 1.0}, {{0.0, 2.0}, {2.0, 0.0}}));
}

TEST_CASE("round trip and hash") {
  const auto c = parse_config(small_solve());
  const auto back = parse_config(serialize(c));
  CHECK(back == c);
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(c).size() == 16);
  auto j = small_solve();
  j["workers"] = 4;
  j["output"] = "elsewhere";
  CHECK(config_hash(parse_config(j)) == config_hash(c));
  j["seed"] = 5;
  CHECK(config_hash(parse_config(j)) != config_hash(c));
}

TEST_CASE("structural violations are rejected with paths") {
  auto j = small_solve();
  j["model"] = json::parse(
      R"({"family": "power", "k": 2, "p": 3, "lambda": [1, 1], "q": [2, 2],
          "beta": [[0, 1], [1, 0]]})");
  const auto issues = issue_paths(j);
  CHECK(any_contains(issues, "eq4:"));
  CHECK(any_contains(issues, "/model"));

  j = small_solve();
  j["domain"]["nr"] = -3;
  CHECK(any_contains(issue_paths(j), "/domain"));
  j = small_solve();
  j.erase("domain");
  CHECK(any_contains(issue_paths(j), "/domain"));
  j = small_solve();
  j["task"] = "dance";
  CHECK(any_contains(issue_paths(j), "/task"));
  j = small_solve();
  j["diffusion"] = json::array({1.0});
  CHECK_FALSE(issue_paths(j).empty());
  CHECK_THROWS_AS(parse_config(std::string("{\"task\": ")), ConfigError);
}

TEST_CASE("sweep drops duplicates and waives beta = 0") {
  auto j = small_solve();
  j["task"] = "sweep_beta";
  j["betas"] = json::array({1.0, 0.0, 1.0});
  const auto table = sweep_beta(parse_config(j));
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0].beta == 0.0);
  CHECK(table.rows[0].assumptions_waived);
  CHECK(table.rows[1].beta == 1.0);
  CHECK_FALSE(table.warnings.empty());
  for (const auto& r : table.rows) CHECK(r.status == "converged");
  std::ostringstream csv;
  write_sweep_csv(table, csv);
  const std::string text = csv.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

TEST_CASE("run writes outputs and is deterministic") {
  const auto dir = scratch("solve");
  auto j = small_solve();
  j["output"] = dir.string();
  const auto c = parse_config(j);
  const auto a = run_experiment(c);
  CHECK(a.ok);
  CHECK(fs::exists(dir / "summary.json"));
  CHECK(fs::exists(dir / "resolved_config.json"));
  auto sa = a.summary;
  auto sb = run_experiment(c).summary;
  sa.erase("timing");
  sb.erase("timing");
  CHECK(sa == sb);
  CHECK(sa["config_hash"] == config_hash(c));
  fs::remove_all(dir);
}

TEST_CASE("assumption check task reports failures") {
  const auto dir = scratch("check");
  auto j = small_solve();
  j["task"] = "check_assumptions";
  j["output"] = dir.string();
  j["potentials"] = json::array({json{{"kind", "constant"}, {"value", -100.0}},
                                 json{{"kind", "constant"}, {"value", 0.0}}});
  const auto r = run_experiment(parse_config(j));
  CHECK_FALSE(r.ok);
  CHECK(r.summary["flags"]["all_pass"] == false);
  fs::remove_all(dir);
}
