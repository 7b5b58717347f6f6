#include <doctest.h>

#include "radarnav/scenario.hpp"
#include "support.hpp"

using namespace radarnav;
using doctest::Approx;

namespace {

std::string error_of(const std::string& json) {
  try {
    parse_scenario(json);
  } catch (const ScenarioError& e) {
    return e.what();
  }
  return {};
}

bool mentions(const std::string& message, const std::string& key) { return message.find(key) != std::string::npos; }

}  // namespace

TEST_SUITE("scenario") {
  TEST_CASE("bundled scenarios parse and validate") {
    for (const char* name : {"one_pole", "two_poles_26", "error_sweep"}) {
      CAPTURE(name);
      const Scenario s = load_scenario(testing::kScenarioDir / (std::string(name) + ".json"));
      CHECK_NOTHROW(s.validate());
    }
    const Scenario ring = load_scenario(testing::kScenarioDir / "two_poles_26.json");
    CHECK(ring.batch.trials == 26);
    CHECK(ring.world.obstacles.size() == 2);
  }

  TEST_CASE("an empty object gives the defaults") {
    const Scenario s = parse_scenario("{}");
    const Scenario d;
    CHECK(s.radar.chirps_per_frame == d.radar.chirps_per_frame);
    CHECK(s.world.seed == d.world.seed);
    CHECK(s.tracker.birth_threshold == d.tracker.birth_threshold);
    CHECK(s.world.obstacles.size() == d.world.obstacles.size());
  }

  TEST_CASE("angles in degrees are converted to radians") {
    const Scenario s = parse_scenario(R"({
      "radar": {"fov_half_angle_deg": 30},
      "noise": {"bearing_error_base_deg": 2},
      "avoidance": {"max_turn_rate_deg_s": 90},
      "sweep": {"max_bearing_deg": 45}
    })");
    CHECK(s.radar.fov_half_angle == Approx(deg2rad(30.0)));
    CHECK(s.radar.noise.bearing_error_base == Approx(deg2rad(2.0)));
    CHECK(s.avoidance.max_turn_rate == Approx(std::numbers::pi / 2));
    CHECK(s.sweep.max_bearing == Approx(std::numbers::pi / 4));
  }

  TEST_CASE("obstacles, vectors and enumerations") {
    const Scenario s = parse_scenario(R"({
      "detector": {"range_window": "rectangular"},
      "avoidance": {"mode": "side_step"},
      "world": {"obstacles": [{"center": [1, 2], "radius_m": 0.3, "velocity": [0, -0.5]}],
                "start": [-3, 0], "goal": [3, 0.5]}
    })");
    CHECK(s.detector.range_window == Window::rectangular);
    CHECK(s.avoidance.mode == AvoidanceMode::side_step);
    REQUIRE(s.world.obstacles.size() == 1);
    CHECK(s.world.obstacles[0].center == Vec2(1, 2));
    CHECK(s.world.obstacles[0].radius == 0.3);
    CHECK(s.world.obstacles[0].velocity == Vec2(0, -0.5));
    CHECK(s.world.goal == Vec2(3, 0.5));
  }

  TEST_CASE("avoidance radius follows the world unless given") {
    CHECK(parse_scenario(R"({"world": {"mav_radius_m": 0.4}})").avoidance.mav_radius == 0.4);
    CHECK(parse_scenario(R"({"world": {"mav_radius_m": 0.4}, "avoidance": {"mav_radius_m": 0.1}})")
              .avoidance.mav_radius == 0.1);
  }

  TEST_CASE("nullable settings") {
    CHECK_FALSE(parse_scenario(R"({"radar": {"antenna_spacing_m": null}})").radar.antenna_spacing.has_value());
    CHECK(parse_scenario(R"({"radar": {"antenna_spacing_m": 0.002}})").radar.antenna_spacing == 0.002);
    CHECK_FALSE(parse_scenario(R"({"noise": {"halt_noise_burst": null}})").radar.noise.halt_noise_burst.has_value());
    const Scenario burst = parse_scenario(
        R"({"noise": {"halt_noise_burst": {"duration_s": 0.5, "multiplier": 3, "speed_threshold_mps": 0.1}}})");
    REQUIRE(burst.radar.noise.halt_noise_burst.has_value());
    CHECK(burst.radar.noise.halt_noise_burst->multiplier == 3.0);
  }

  TEST_CASE("unknown keys are named in the error") {
    CHECK(mentions(error_of(R"({"radr": {}})"), "radr"));
    CHECK(mentions(error_of(R"({"radar": {"chirps": 64}})"), "radar.chirps"));
    CHECK(mentions(error_of(R"({"world": {"obstacles": [{"centre": [0, 0]}]}})"), "world.obstacles[0].centre"));
    CHECK(mentions(error_of(R"({"noise": {"halt_noise_burst": {"length": 1}}})"), "halt_noise_burst.length"));
  }

  TEST_CASE("wrong types are rejected") {
    CHECK(mentions(error_of(R"({"radar": {"chirps_per_frame": 16.5}})"), "chirps_per_frame"));
    CHECK(mentions(error_of(R"({"radar": {"bandwidth_hz": "4e9"}})"), "bandwidth_hz"));
    CHECK(mentions(error_of(R"({"world": {"start": [1]}})"), "start"));
    CHECK(mentions(error_of(R"({"world": {"seed": -1}})"), "seed"));
    CHECK(mentions(error_of(R"({"world": {"avoidance_enabled": 1}})"), "avoidance_enabled"));
    CHECK(mentions(error_of(R"({"world": {"obstacles": {}}})"), "obstacles"));
    CHECK(mentions(error_of(R"({"radar": []})"), "radar"));
    CHECK_FALSE(error_of(R"([1, 2])").empty());
  }

  TEST_CASE("invalid enumerations and values are rejected") {
    CHECK(mentions(error_of(R"({"detector": {"range_window": "hamming"}})"), "range_window"));
    CHECK(mentions(error_of(R"({"avoidance": {"mode": "swerve"}})"), "mode"));
    CHECK_FALSE(error_of(R"({"radar": {"chirps_per_frame": 0}})").empty());
    CHECK_FALSE(error_of(R"({"world": {"frame_rate_hz": 0}})").empty());
    CHECK_FALSE(error_of(R"({"tracker": {"detection_probability": 1.5}})").empty());
  }

  TEST_CASE("malformed JSON and missing files") {
    CHECK(mentions(error_of("{\"radar\": "), "malformed"));
    CHECK_THROWS_AS(load_scenario(testing::kScenarioDir / "does_not_exist.json"), ScenarioError);
  }
}
