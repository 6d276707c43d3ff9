#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "m4bram/error.hpp"
#include "m4bram/scenario.hpp"

using namespace m4bram;

TEST_CASE("config labels") {
  CHECK(config_by_label("DP-M4S").arch == ArchKind::M4BRAM_S);
  CHECK(config_by_label("DP-M4S").pumping == Pumping::DoublePumped);
  CHECK(config_by_label("SY-M4L").arch == ArchKind::M4BRAM_L);
  CHECK(config_by_label("1DA").n_i_allowed == std::vector<int>{1});
  CHECK(config_by_label("2SA").n_i_allowed == std::vector<int>{2});
  CHECK(dla_config().arch == ArchKind::PlainBram);
  CHECK_THROWS_AS(config_by_label("M4X"), ConfigError);
}

TEST_CASE("scenario ids have defaults") {
  for (const auto& id : scenario_ids()) {
    CHECK(default_scenario(id).id == id);
  }
  CHECK_THROWS_AS(default_scenario("nope"), ConfigError);
}

TEST_CASE("empty sweep yields a header-only report") {
  ScenarioRunner runner;
  Scenario s = default_scenario("act-sweep");
  s.precisions.clear();
  const auto rep = run_scenario(s, runner);
  CHECK(rep.rows.empty());
  const std::string csv = rep.csv();
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);
  CHECK(csv.rfind("network,fpga,config,baseline,variant,w_bits,a_bits,latency", 0) == 0);
}

TEST_CASE("runner memoizes shared baselines and reports are stable") {
  Scenario s = default_scenario("act-sweep");
  s.networks = {"alexnet"};
  s.precisions = {5, 6};
  ScenarioRunner runner;
  const auto a = run_scenario(s, runner);
  const auto searches = runner.searches_run();
  CHECK(a.rows.size() == 6);
  CHECK(searches == 8); // DLA and three configs at two precisions
  const auto b = run_scenario(s, runner);
  CHECK(runner.searches_run() == searches);
  CHECK(a.csv() == b.csv());
  for (const auto& r : a.rows) {
    CHECK(r.speedup == doctest::Approx(static_cast<double>(r.baseline_latency) / r.latency));
    CHECK(r.baseline == "DLA");
  }
}

TEST_CASE("scenario errors carry the scenario id") {
  Scenario s = default_scenario("act-sweep");
  s.networks = {"no-such-net.json"};
  s.precisions = {8};
  ScenarioRunner runner;
  try {
    run_scenario(s, runner);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("act-sweep") != std::string::npos);
  }
}

TEST_CASE("atomic report write and geomean") {
  const auto dir = std::filesystem::temp_directory_path() / "m4bram_scenario_test";
  std::filesystem::create_directories(dir);
  ScenarioReport rep{"demo", {}};
  const auto path = write_report(rep, dir);
  CHECK(path.filename() == "demo.csv");
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == rep.csv());
  CHECK_FALSE(std::filesystem::exists(dir / "demo.csv.tmp"));
  std::filesystem::remove_all(dir);

  CHECK(geomean({2.0, 8.0}) == doctest::Approx(4.0));
  CHECK_THROWS(geomean({}));
  CHECK_THROWS(geomean({1.0, -1.0}));
}
