#include "radarnav/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace radarnav {
namespace {

using nlohmann::json;

/// Strict reader over one JSON object: every key must be consumed.
class Section {
 public:
  Section(const json& object, std::string path) : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) throw ScenarioError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return object_.contains(key); }

  void number(const std::string& key, double& out, double scale = 1.0) {
    if (const json* v = take(key)) {
      if (!v->is_number()) throw ScenarioError(where(key) + ": expected a number");
      out = v->get<double>() * scale;
    }
  }

  void optional_number(const std::string& key, std::optional<double>& out) {
    if (const json* v = take(key)) {
      if (v->is_null()) {
        out.reset();
        return;
      }
      if (!v->is_number()) throw ScenarioError(where(key) + ": expected a number or null");
      out = v->get<double>();
    }
  }

  void integer(const std::string& key, int& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) throw ScenarioError(where(key) + ": expected an integer");
      out = v->get<int>();
    }
  }

  void seed(const std::string& key, std::uint64_t& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
        throw ScenarioError(where(key) + ": expected a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) throw ScenarioError(where(key) + ": expected true or false");
      out = v->get<bool>();
    }
  }

  void text(const std::string& key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) throw ScenarioError(where(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }

  void vec2(const std::string& key, Vec2& out) {
    if (const json* v = take(key)) out = to_vec2(*v, where(key));
  }

  const json* take(const std::string& key) {
    seen_.insert(key);
    auto it = object_.find(key);
    return it == object_.end() ? nullptr : &*it;
  }

  std::string where(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = object_.begin(); it != object_.end(); ++it) {
      if (!seen_.count(it.key())) throw ScenarioError("unknown key '" + where(it.key()) + "'");
    }
  }

  static Vec2 to_vec2(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw ScenarioError(where + ": expected [x, y]");
    return {v[0].get<double>(), v[1].get<double>()};
  }

 private:
  const json& object_;
  std::string path_;
  std::set<std::string> seen_;
};

void parse_radar(const json& j, RadarConfig& radar) {
  Section s(j, "radar");
  s.number("carrier_frequency_hz", radar.carrier_frequency);
  s.number("bandwidth_hz", radar.bandwidth);
  s.number("chirp_duration_s", radar.chirp_duration);
  s.integer("samples_per_chirp", radar.samples_per_chirp);
  s.integer("chirps_per_frame", radar.chirps_per_frame);
  s.optional_number("antenna_spacing_m", radar.antenna_spacing);
  s.number("fov_half_angle_deg", radar.fov_half_angle, deg2rad(1.0));
  s.number("min_range_m", radar.min_range);
  s.number("max_range_m", radar.max_range);
  s.boolean("range_amplitude_decay", radar.range_amplitude_decay);
  s.finish();
}

void parse_noise(const json& j, NoiseModel& noise) {
  Section s(j, "noise");
  s.number("iq_noise_std", noise.iq_noise_std);
  s.number("range_error_base_m", noise.range_error_base);
  s.number("range_error_slope_m_per_rad", noise.range_error_slope);
  s.number("bearing_error_base_deg", noise.bearing_error_base, deg2rad(1.0));
  s.number("bearing_error_slope_deg_per_deg", noise.bearing_error_slope);
  s.number("clutter_rate", noise.clutter_rate);
  if (const json* burst = s.take("halt_noise_burst")) {
    if (burst->is_null()) {
      noise.halt_noise_burst.reset();
    } else {
      HaltNoiseBurst b;
      Section bs(*burst, "noise.halt_noise_burst");
      bs.number("duration_s", b.duration);
      bs.number("multiplier", b.multiplier);
      bs.number("speed_threshold_mps", b.speed_threshold);
      bs.finish();
      noise.halt_noise_burst = b;
    }
  }
  s.finish();
}

void parse_detector(const json& j, DetectorConfig& det) {
  Section s(j, "detector");
  s.integer("range_zero_pad", det.range_zero_pad);
  s.integer("doppler_zero_pad", det.doppler_zero_pad);
  std::string window = det.range_window == Window::hann ? "hann" : "rectangular";
  s.text("range_window", window);
  if (window == "hann") det.range_window = Window::hann;
  else if (window == "rectangular") det.range_window = Window::rectangular;
  else throw ScenarioError("detector.range_window: expected \"hann\" or \"rectangular\"");
  s.number("threshold", det.threshold);
  s.boolean("range_interpolation", det.range_interpolation);
  s.finish();
}

void parse_tracker(const json& j, TrackerConfig& t) {
  Section s(j, "tracker");
  s.number("detection_probability", t.detection_probability);
  s.number("gate_threshold", t.gate_threshold);
  s.number("birth_threshold", t.birth_threshold);
  s.number("death_threshold", t.death_threshold);
  s.number("process_noise_range", t.process_noise_range);
  s.number("process_noise_bearing", t.process_noise_bearing);
  double sr = std::sqrt(t.measurement_noise(0, 0));
  double sb = std::sqrt(t.measurement_noise(1, 1));
  double sv = std::sqrt(t.measurement_noise(2, 2));
  s.number("measurement_std_range_m", sr);
  s.number("measurement_std_bearing_deg", sb, deg2rad(1.0));
  s.number("measurement_std_radial_velocity_mps", sv);
  t.measurement_noise = MeasurementVector(sr * sr, sb * sb, sv * sv).asDiagonal();
  s.number("initial_bearing_rate_std_rad_s", t.initial_bearing_rate_std);
  s.number("initial_range_accel_std_mps2", t.initial_range_accel_std);
  s.number("initial_bearing_accel_std_rad_s2", t.initial_bearing_accel_std);
  s.number("singular_inflation", t.singular_inflation);
  s.finish();
}

void parse_avoidance(const json& j, AvoidanceConfig& a, bool& mav_radius_given) {
  Section s(j, "avoidance");
  std::string mode = to_string(a.mode);
  s.text("mode", mode);
  if (mode == "velocity_obstacle") a.mode = AvoidanceMode::velocity_obstacle;
  else if (mode == "side_step") a.mode = AvoidanceMode::side_step;
  else throw ScenarioError("avoidance.mode: expected \"velocity_obstacle\" or \"side_step\"");
  mav_radius_given = s.has("mav_radius_m");
  s.number("mav_radius_m", a.mav_radius);
  s.number("safety_margin_m", a.safety_margin);
  s.number("max_speed_mps", a.max_speed);
  s.number("max_turn_rate_deg_s", a.max_turn_rate, deg2rad(1.0));
  s.number("side_step_distance_m", a.side_step_distance);
  s.finish();
}

void parse_world(const json& j, WorldConfig& w) {
  Section s(j, "world");
  s.vec2("arena_min", w.arena_min);
  s.vec2("arena_max", w.arena_max);
  if (const json* obstacles = s.take("obstacles")) {
    if (!obstacles->is_array()) throw ScenarioError("world.obstacles: expected an array");
    w.obstacles.clear();
    for (std::size_t i = 0; i < obstacles->size(); ++i) {
      Obstacle o;
      Section os((*obstacles)[i], "world.obstacles[" + std::to_string(i) + "]");
      os.vec2("center", o.center);
      os.number("radius_m", o.radius);
      os.vec2("velocity", o.velocity);
      os.finish();
      w.obstacles.push_back(o);
    }
  }
  s.vec2("start", w.start);
  s.vec2("goal", w.goal);
  s.number("goal_tolerance_m", w.goal_tolerance);
  s.number("mav_radius_m", w.mav_radius);
  s.number("max_speed_mps", w.max_speed);
  s.number("max_accel_mps2", w.max_accel);
  s.number("lag_time_constant_s", w.lag_time_constant);
  s.number("frame_rate_hz", w.frame_rate);
  s.number("timeout_s", w.timeout);
  s.seed("seed", w.seed);
  s.boolean("avoidance_enabled", w.avoidance_enabled);
  s.number("assumed_obstacle_radius_m", w.assumed_obstacle_radius);
  s.number("obstacle_memory_s", w.obstacle_memory);
  s.boolean("assume_static_obstacles", w.assume_static_obstacles);
  s.number("side_step_forward_fraction", w.side_step_forward_fraction);
  s.number("side_step_gain", w.side_step_gain);
  s.number("side_step_fov_fraction", w.side_step_fov_fraction);
  s.finish();
}

void parse_batch(const json& j, BatchConfig& b) {
  Section s(j, "batch");
  s.vec2("ring_center", b.ring_center);
  s.number("ring_radius_m", b.ring_radius);
  s.integer("trials", b.trials);
  s.number("start_angle_deg", b.start_angle, deg2rad(1.0));
  s.finish();
}

void parse_sweep(const json& j, SweepConfig& sw) {
  Section s(j, "sweep");
  s.number("range_m", sw.range);
  s.number("max_bearing_deg", sw.max_bearing, deg2rad(1.0));
  s.integer("bearing_steps", sw.bearing_steps);
  s.integer("seeds_per_bearing", sw.seeds_per_bearing);
  s.finish();
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("malformed JSON: ") + e.what());
  }

  Scenario scenario;
  bool avoidance_radius_given = false;
  try {
    Section s(root, "scenario");
    std::string description;
    s.text("description", description);
    if (const json* v = s.take("radar")) parse_radar(*v, scenario.radar);
    if (const json* v = s.take("noise")) parse_noise(*v, scenario.radar.noise);
    if (const json* v = s.take("detector")) parse_detector(*v, scenario.detector);
    if (const json* v = s.take("tracker")) parse_tracker(*v, scenario.tracker);
    if (const json* v = s.take("avoidance")) parse_avoidance(*v, scenario.avoidance, avoidance_radius_given);
    if (const json* v = s.take("world")) parse_world(*v, scenario.world);
    if (const json* v = s.take("batch")) parse_batch(*v, scenario.batch);
    if (const json* v = s.take("sweep")) parse_sweep(*v, scenario.sweep);
    s.finish();
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("invalid value: ") + e.what());
  }
  // The planner assumes the physical vehicle size unless told otherwise.
  if (!avoidance_radius_given) scenario.avoidance.mav_radius = scenario.world.mav_radius;

  try {
    scenario.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what());
  }
  return scenario;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

}  // namespace radarnav
