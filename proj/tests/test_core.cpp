#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "slicerl/core.hpp"
#include "slicerl/rng.hpp"

using namespace slicerl;

TEST_CASE("map_action reference points") {
  SliceConfig cfg;
  CHECK(map_action({0.33269}, cfg) == doctest::Approx(1330.76).epsilon(1e-9));
  CHECK(map_action({0.0}, cfg) == 500.0);
  CHECK(map_action({1.0}, cfg) == 4000.0);
  CHECK(map_action({-0.3}, cfg) == 500.0);
  CHECK(map_action({1.7}, cfg) == 4000.0);
}

TEST_CASE("map_action snapping") {
  SliceConfig cfg;
  cfg.snap_to_grid = true;
  CHECK(map_action({0.6}, cfg) == 2500.0);  // 2400 rounds up to the grid
  CHECK(map_action({0.0}, cfg) == 500.0);
  CHECK(map_action({1.0}, cfg) == 4000.0);
}

TEST_CASE("map_action is monotone, in range, and stable under remapping") {
  SliceConfig cfg;
  Rng rng(7);
  for (int snap = 0; snap < 2; ++snap) {
    cfg.snap_to_grid = snap == 1;
    double prev = map_action({0.0}, cfg);
    for (int i = 1; i <= 200; ++i) {
      const double a = i / 200.0;
      const double mc = map_action({a}, cfg);
      CHECK(mc >= cfg.cpu_min_mc);
      CHECK(mc <= cfg.cpu_max_mc);
      CHECK(mc >= prev);
      prev = mc;
    }
    for (int i = 0; i < 200; ++i) {
      const double mc = map_action({rng.uniform(-0.5, 1.5)}, cfg);
      // feeding the mapped value back through the map is a fixed point
      CHECK(map_action({mc / cfg.load_norm_max_mc}, cfg) ==
            doctest::Approx(mc).epsilon(1e-12));
    }
  }
}

TEST_CASE("normalize_observation") {
  SliceConfig cfg;
  const Observation zero = normalize_observation(0, 0, cfg);
  CHECK(zero.traffic_norm == 0.0);
  CHECK(zero.cpu_usage_norm == 0.0);

  const Observation capped = normalize_observation(40, 9000, cfg);
  CHECK(capped.traffic_norm == 1.0);
  CHECK(capped.cpu_usage_norm == 1.0);

  const Observation mid = normalize_observation(5, 1400, cfg);
  CHECK(mid.traffic_norm == doctest::Approx(0.25));
  CHECK(mid.cpu_usage_norm == doctest::Approx(0.35));

  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    const Observation obs =
        normalize_observation(rng.uniform(0, 100), rng.uniform(0, 20000), cfg);
    CHECK(obs.traffic_norm >= 0.0);
    CHECK(obs.traffic_norm <= 1.0);
    CHECK(obs.cpu_usage_norm >= 0.0);
    CHECK(obs.cpu_usage_norm <= 1.0);
  }
}

TEST_CASE("config defaults, file round trip, and hash stability") {
  const SliceConfig cfg = SliceConfig::from_text("");
  CHECK(cfg.cpu_min_mc == 500.0);
  CHECK(cfg.cpu_max_mc == 4000.0);
  CHECK(cfg.traffic_mean == 5.0);
  CHECK(cfg.per_ue_demand_mc == 280.0);
  CHECK(cfg.qos_threshold_mbps == 1.0);
  CHECK_FALSE(cfg.snap_to_grid);

  SliceConfig other;
  other.traffic_std = 4.125;
  other.degradation_exponent = 16.0;
  other.snap_to_grid = true;
  const SliceConfig reparsed = SliceConfig::from_text(other.to_text());
  CHECK(reparsed.to_text() == other.to_text());
  CHECK(reparsed.hash() == other.hash());
  CHECK(reparsed.hash() != cfg.hash());
}

TEST_CASE("config parsing accepts overrides, comments, and blank lines") {
  const SliceConfig cfg = SliceConfig::from_text(
      "# comment\n"
      "\n"
      "cpu_max_mc=3000\n"
      "traffic_std=2.5\n"
      "snap_to_grid=true\n");
  CHECK(cfg.cpu_max_mc == 3000.0);
  CHECK(cfg.traffic_std == 2.5);
  CHECK(cfg.snap_to_grid);
  CHECK(cfg.cpu_min_mc == 500.0);  // untouched default
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(SliceConfig::from_text("no_such_key=1\n"), ConfigError);
  CHECK_THROWS_AS(SliceConfig::from_text("cpu_min_mc=abc\n"), ConfigError);
  CHECK_THROWS_AS(SliceConfig::from_text("cpu_min_mc=0\n"), ConfigError);
  CHECK_THROWS_AS(SliceConfig::from_text("cpu_min_mc=5000\n"), ConfigError);
  CHECK_THROWS_AS(SliceConfig::from_text("degradation_exponent=0.5\n"),
                  ConfigError);
  CHECK_THROWS_AS(SliceConfig::from_text("traffic_std=-1\n"), ConfigError);
  CHECK_THROWS_AS(SliceConfig::from_text("control_period_s=2\n"), ConfigError);
  CHECK_THROWS_AS(SliceConfig::from_text("qos_threshold_mbps\n"), ConfigError);
}

TEST_CASE("round6 matches the trace file resolution") {
  CHECK(round6(0.3125) == 0.3125);
  CHECK(round6(1330.7600004) == doctest::Approx(1330.76).epsilon(1e-15));
  CHECK(round6(1.0000004) == 1.0);
  CHECK(round6(-0.0000004) == 0.0);
}
