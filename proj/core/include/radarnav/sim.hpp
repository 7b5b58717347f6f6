#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "radarnav/avoidance.hpp"
#include "radarnav/detector.hpp"
#include "radarnav/radar_model.hpp"
#include "radarnav/tracker.hpp"

namespace radarnav {

/// Vertical pole, modelled as a disc in the plane.
struct Obstacle {
  Vec2 center = Vec2::Zero();
  double radius = 0.25;  // m
  Vec2 velocity = Vec2::Zero();

  Vec2 center_at(double t) const { return center + velocity * t; }
};

struct WorldConfig {
  Vec2 arena_min{-5.0, -5.0};
  Vec2 arena_max{5.0, 5.0};
  std::vector<Obstacle> obstacles;
  Vec2 start{-4.0, 0.0};
  Vec2 goal{4.0, 0.0};
  double goal_tolerance = 0.25;      // m
  double mav_radius = 0.15;          // m
  double max_speed = 1.0;            // m/s, also the cruise speed
  double max_accel = 2.0;            // m/s^2
  double lag_time_constant = 0.3;    // s, first-order velocity response
  double frame_rate = 10.0;          // Hz
  double timeout = 60.0;             // s
  std::uint64_t seed = 1;
  bool avoidance_enabled = true;
  // Autopilot
  double assumed_obstacle_radius = 0.25;  // m, radius given to tracked obstacles
  double obstacle_memory = 1.5;           // s, lifetime of a lost confirmed track's last world estimate
  bool assume_static_obstacles = true;    // ignore track velocity; noisy bearing rates otherwise fake motion
  double side_step_forward_fraction = 0.5;  // forward speed during a side step, fraction of max_speed
  double side_step_gain = 2.0;              // 1/s, lateral position gain
  double side_step_fov_fraction = 0.6;      // travel direction limit during a side step, fraction of the FOV half-angle

  double frame_period() const { return 1.0 / frame_rate; }
  void validate() const;
};

/// Start poses placed on a ring, each flying to the diametrically opposite point.
struct BatchConfig {
  Vec2 ring_center = Vec2::Zero();
  double ring_radius = 4.0;  // m
  int trials = 26;
  double start_angle = 0.0;  // rad, angle of trial 0
};

struct SweepConfig {
  double range = 4.0;                      // m
  double max_bearing = deg2rad(38.0);      // rad
  int bearing_steps = 20;
  int seeds_per_bearing = 200;
};

struct Scenario {
  RadarConfig radar;
  DetectorConfig detector;
  TrackerConfig tracker;
  AvoidanceConfig avoidance;
  WorldConfig world;
  BatchConfig batch;
  SweepConfig sweep;

  void validate() const;
};

enum class Outcome { reached_goal, collision, timeout };
const char* to_string(Outcome outcome);

struct TruthRecord {
  int frame = 0;
  double time = 0.0;
  Vec2 position = Vec2::Zero();
  double heading = 0.0;
  Vec2 velocity = Vec2::Zero();
  double clearance = 0.0;
};

struct DetectionRecord {
  int frame = 0;
  int index = 0;
  Detection detection;
  bool clutter = false;
};

struct TrackRecord {
  int frame = 0;
  double time = 0.0;
  std::uint64_t track_id = 0;
  TrackStatus status = TrackStatus::candidate;
  double range = 0.0;
  double bearing = 0.0;
  double range_rate = 0.0;
  double bearing_rate = 0.0;
  double position_score = 0.0;
  int assigned_detection = -1;
};

struct CommandRecord {
  int frame = 0;
  double time = 0.0;
  std::string mode;            // disabled | none | velocity_obstacle | side_step | emergency_stop
  std::int64_t obstacle_id = -1;
  bool in_cone = false;
  Vec2 ego_velocity = Vec2::Zero();  // V_A fed to avoidance (world frame)
  Vec2 command = Vec2::Zero();       // commanded velocity (world frame)
  double half_angle = 0.0;
};

struct EventRecord {
  int frame = 0;
  double time = 0.0;
  std::string kind;
  std::int64_t id = -1;
};

struct TrialLog {
  std::string trial_id;
  std::uint64_t seed = 0;
  Outcome outcome = Outcome::timeout;
  double min_clearance = 0.0;
  int frames = 0;
  std::vector<TruthRecord> truth;
  std::vector<DetectionRecord> detections;
  std::vector<TrackRecord> tracks;
  std::vector<CommandRecord> commands;
  std::vector<EventRecord> events;

  std::size_t count_events(const std::string& kind) const;
};

struct SideStepManoeuvre {
  double lateral_target = 0.0;  // m, offset from the start->goal line
  double clear_along = 0.0;     // m, along-track distance at which flight resumes
  Vec2 obstacle_world = Vec2::Zero();
};

struct RememberedObstacle {
  std::uint64_t id = 0;
  Vec2 center_world = Vec2::Zero();
  Vec2 velocity_world = Vec2::Zero();
  double last_seen = 0.0;
};

struct SimState {
  int frame = 0;
  double time = 0.0;
  EgoState ego;
  Tracker tracker;
  Vec2 command = Vec2::Zero();
  std::optional<SideStepManoeuvre> manoeuvre;
  std::vector<RememberedObstacle> memory;
  std::optional<double> halt_since;
};

SimState initial_state(const Scenario& scenario);

/// Smallest surface-to-surface distance between the vehicle and any obstacle
/// (+inf without obstacles). Negative means collision.
double clearance(const WorldConfig& world, const Vec2& position, double time);

/// Echoes of the obstacles inside the sensor window: each disc reflects from
/// its surface point nearest to the vehicle.
std::vector<TargetEcho> visible_echoes(const Scenario& scenario, const EgoState& ego, double time);

/// One closed-loop frame: sense, detect, track, decide, move. Appends
/// detections, tracks, commands and events to `log`.
void step(SimState& state, const Scenario& scenario, TrialLog& log);

/// Runs until goal, collision or timeout. Deterministic given the scenario.
TrialLog run_trial(const Scenario& scenario, const std::string& trial_id = "trial");

/// Ring of start poses around the batch centre, per-trial seeds derived from
/// world.seed. Trial ids are trial_000, trial_001, ...
std::vector<Scenario> make_ring_batch(const Scenario& base, int trials);
std::vector<std::string> ring_trial_ids(int trials);

/// Runs trials on `parallelism` worker threads; output order follows input.
std::vector<TrialLog> run_batch(const std::vector<Scenario>& scenarios, const std::vector<std::string>& trial_ids,
                                int parallelism);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct SweepRow {
  double bearing = 0.0;        // rad, true
  double range_error = 0.0;    // m, mean absolute
  double bearing_error = 0.0;  // rad, mean absolute
  int detected = 0;
  int missed = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  LinearFit range_fit;    // range_error [m] vs bearing [rad]
  LinearFit bearing_fit;  // bearing_error [rad] vs bearing [rad]
};

/// Static target at sweep.range swept over [0, sweep.max_bearing]; per bearing
/// the detector runs on sweep.seeds_per_bearing independently noised frames.
SweepResult error_sweep(const Scenario& scenario);

}  // namespace radarnav
