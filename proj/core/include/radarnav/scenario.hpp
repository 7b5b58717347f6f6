#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "radarnav/sim.hpp"

namespace radarnav {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a JSON scenario with optional sections radar, noise, detector,
/// tracker, avoidance, world, batch and sweep. Every key is optional and
/// falls back to the struct default; unknown keys, wrong types and invalid
/// values throw ScenarioError naming the offending key. Key names carry their
/// unit (e.g. "fov_half_angle_deg", "chirp_duration_s").
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace radarnav
