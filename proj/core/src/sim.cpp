#include "radarnav/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

namespace radarnav {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Stream indices for derive_seed: each frame owns three independent streams.
constexpr std::uint64_t kPerturbStream = 0;
constexpr std::uint64_t kFrameStream = 1;
constexpr std::uint64_t kClutterStream = 2;

std::uint64_t frame_seed(std::uint64_t seed, int frame, std::uint64_t stream) {
  return derive_seed(seed, static_cast<std::uint64_t>(frame) * 3 + stream);
}

struct PathFrame {
  Vec2 origin;
  Vec2 forward;
  Vec2 left;

  double along(const Vec2& p) const { return (p - origin).dot(forward); }
  double lateral(const Vec2& p) const { return (p - origin).dot(left); }
};

PathFrame path_frame(const WorldConfig& world) {
  const Vec2 d = world.goal - world.start;
  const double heading = d.norm() > 0.0 ? std::atan2(d.y(), d.x()) : 0.0;
  const Vec2 f(std::cos(heading), std::sin(heading));
  return {world.start, f, Vec2(-f.y(), f.x())};
}

void add_event(TrialLog& log, const SimState& state, std::string kind, std::int64_t id) {
  log.events.push_back({state.frame, state.time, std::move(kind), id});
}

double noise_multiplier(SimState& state, const Scenario& scenario) {
  const auto& burst = scenario.radar.noise.halt_noise_burst;
  if (!burst) return 1.0;
  if (state.ego.velocity.norm() < burst->speed_threshold) {
    if (!state.halt_since) state.halt_since = state.time;
    if (state.time - *state.halt_since <= burst->duration) return burst->multiplier;
    return 1.0;
  }
  state.halt_since.reset();
  return 1.0;
}

std::vector<Detection> sense(SimState& state, const Scenario& scenario, TrialLog& log) {
  const RadarConfig& radar = scenario.radar;
  const double multiplier = noise_multiplier(state, scenario);
  std::mt19937_64 perturb_rng(frame_seed(scenario.world.seed, state.frame, kPerturbStream));

  std::vector<TargetEcho> echoes = visible_echoes(scenario, state.ego, state.time);
  for (auto& e : echoes) e = perturb_echo(e, radar.noise, perturb_rng, multiplier);

  const IQFrame frame = synthesize_frame(radar, echoes, frame_seed(scenario.world.seed, state.frame, kFrameStream),
                                         state.time, multiplier);
  std::vector<Detection> detections = process_frame(radar, scenario.detector, frame);
  const std::size_t real_count = detections.size();

  if (radar.noise.clutter_rate > 0.0) {
    std::mt19937_64 rng(frame_seed(scenario.world.seed, state.frame, kClutterStream));
    std::poisson_distribution<int> count(radar.noise.clutter_rate);
    std::uniform_real_distribution<double> range(radar.min_range, radar.max_range);
    std::uniform_real_distribution<double> bearing(-radar.fov_half_angle, radar.fov_half_angle);
    const double vmax = 0.5 * radar.max_unambiguous_velocity();
    std::uniform_real_distribution<double> velocity(-vmax, vmax);
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      Detection d;
      d.range = range(rng);
      d.bearing = bearing(rng);
      d.radial_velocity = velocity(rng);
      d.magnitude = scenario.detector.threshold;
      d.timestamp = state.time;
      detections.push_back(d);
    }
  }

  for (std::size_t i = 0; i < detections.size(); ++i) {
    log.detections.push_back({state.frame, static_cast<int>(i), detections[i], i >= real_count});
  }
  return detections;
}

void log_tracks(const SimState& state, TrialLog& log) {
  for (const Track& t : state.tracker.tracks()) {
    TrackRecord rec;
    rec.frame = state.frame;
    rec.time = state.time;
    rec.track_id = t.id;
    rec.status = t.status;
    rec.range = t.state.x(state_index::range);
    rec.bearing = t.state.x(state_index::bearing);
    rec.range_rate = t.state.x(state_index::range_rate);
    rec.bearing_rate = t.state.x(state_index::bearing_rate);
    rec.position_score = t.state.position_score();
    rec.assigned_detection = state.tracker.assigned_detection(t.id).value_or(-1);
    log.tracks.push_back(rec);
  }
}

/// Confirmed tracks plus recently lost ones, in the body frame. Track
/// positions refer to the reflecting surface, so the centre is pushed back by
/// the assumed radius along the line of sight.
std::vector<ObstacleEstimate> perceived_obstacles(SimState& state, const Scenario& scenario) {
  const WorldConfig& world = scenario.world;
  const double radius = world.assumed_obstacle_radius;
  std::vector<ObstacleEstimate> out;

  std::vector<std::uint64_t> live;
  for (const Track& t : state.tracker.tracks()) {
    if (!t.confirmed()) continue;
    const RelativeObstacle rel = track_to_obstacle(t);
    const double d = rel.position.norm();
    ObstacleEstimate o;
    o.id = t.id;
    o.radius = radius;
    o.relative_position = d > 0.0 ? Vec2(rel.position * (d + radius) / d) : rel.position;
    // rel.velocity = V_B - V_A in the body frame
    o.relative_velocity = -rel.velocity;
    o.obstacle_velocity = state.ego.to_body(state.ego.velocity) + rel.velocity;
    if (world.assume_static_obstacles) {
      o.obstacle_velocity = Vec2::Zero();
      o.relative_velocity = state.ego.to_body(state.ego.velocity);
    }
    out.push_back(o);
    live.push_back(t.id);

    const Vec2 centre_world = state.ego.position + state.ego.to_world(o.relative_position);
    const Vec2 velocity_world = state.ego.to_world(o.obstacle_velocity);
    auto it = std::find_if(state.memory.begin(), state.memory.end(),
                           [&](const RememberedObstacle& m) { return m.id == t.id; });
    if (it == state.memory.end()) {
      state.memory.push_back({t.id, centre_world, velocity_world, state.time});
    } else {
      *it = {t.id, centre_world, velocity_world, state.time};
    }
  }

  std::erase_if(state.memory, [&](const RememberedObstacle& m) {
    return state.time - m.last_seen > world.obstacle_memory;
  });
  for (const RememberedObstacle& m : state.memory) {
    if (std::find(live.begin(), live.end(), m.id) != live.end()) continue;
    const double age = state.time - m.last_seen;
    const Vec2 centre = m.center_world + m.velocity_world * age;
    ObstacleEstimate o;
    o.id = m.id;
    o.radius = radius;
    o.relative_position = state.ego.to_body(centre - state.ego.position);
    o.obstacle_velocity = state.ego.to_body(m.velocity_world);
    o.relative_velocity = state.ego.to_body(state.ego.velocity) - o.obstacle_velocity;
    out.push_back(o);
  }
  return out;
}

Vec2 preferred_velocity(const SimState& state, const WorldConfig& world) {
  const Vec2 to_goal = world.goal - state.ego.position;
  const double d = to_goal.norm();
  if (d <= 0.0) return Vec2::Zero();
  const double speed = std::min(world.max_speed, d * world.frame_rate);
  return to_goal / d * speed;
}

Vec2 clip_speed(const Vec2& v, double max_speed) {
  const double n = v.norm();
  return n > max_speed ? Vec2(v * (max_speed / n)) : v;
}

CommandRecord decide(SimState& state, const Scenario& scenario, const std::vector<ObstacleEstimate>& obstacles,
                     TrialLog& log) {
  const WorldConfig& world = scenario.world;
  const AvoidanceConfig& cfg = scenario.avoidance;
  const double dt = world.frame_period();
  const Vec2 v_pref = preferred_velocity(state, world);

  CommandRecord rec;
  rec.frame = state.frame;
  rec.time = state.time;
  rec.ego_velocity = v_pref;
  rec.command = v_pref;
  rec.mode = "none";

  if (!world.avoidance_enabled) {
    rec.mode = "disabled";
    state.manoeuvre.reset();
    return rec;
  }

  const auto nearest_index = select_nearest(obstacles);

  if (cfg.mode == AvoidanceMode::velocity_obstacle) {
    if (!nearest_index) return rec;
    const ObstacleEstimate& obs = obstacles[*nearest_index];
    rec.obstacle_id = static_cast<std::int64_t>(obs.id);
    rec.mode = "velocity_obstacle";
    const Vec2 pref_body = state.ego.to_body(v_pref);
    const Vec2 now_body = state.ego.to_body(state.ego.velocity);

    // Goal direction clear: fly it. Otherwise deflect the current velocity,
    // so the turn-rate limit acts on what the vehicle is actually doing. A
    // hovering vehicle may set off in any direction.
    auto plan = [&](const AvoidanceConfig& c) {
      const CollisionCone cone = collision_cone(obs.relative_position, c.combined_radius(obs.radius));
      rec.half_angle = cone.half_angle;
      if (!in_cone(pref_body - obs.obstacle_velocity, cone)) return pref_body;
      rec.in_cone = true;
      const bool hovering = now_body.norm() < 0.1 * c.max_speed;
      AvoidanceConfig limits = c;
      if (hovering) limits.max_turn_rate = std::numbers::pi / dt;
      const Vec2 base = hovering ? pref_body : now_body;
      rec.ego_velocity = state.ego.to_world(base);
      const AvoidanceCommand cmd = avoid(base, obs, limits, dt);
      if (cmd.in_cone) return cmd.velocity;
      // Already deflected: hold the heading at cruise speed while it stays safe.
      const Vec2 cruise = base.normalized() * pref_body.norm();
      return in_cone(cruise - obs.obstacle_velocity, cone) ? base : cruise;
    };
    try {
      rec.command = state.ego.to_world(plan(cfg));
    } catch (const AlreadyInCollision&) {
      // Inside the safety margin: retry against the bare radii, then stop.
      AvoidanceConfig bare = cfg;
      bare.safety_margin = 0.0;
      try {
        rec.command = state.ego.to_world(plan(bare));
        add_event(log, state, "margin_violation", rec.obstacle_id);
      } catch (const AlreadyInCollision&) {
        rec.mode = "emergency_stop";
        rec.in_cone = true;
        rec.command = Vec2::Zero();
        add_event(log, state, "emergency_stop", rec.obstacle_id);
      }
    }
    return rec;
  }

  // side-step manoeuvre
  const PathFrame path = path_frame(world);
  if (state.manoeuvre && path.along(state.ego.position) > state.manoeuvre->clear_along) {
    state.manoeuvre.reset();
    add_event(log, state, "side_step_clear", -1);
  }

  if (nearest_index) {
    ObstacleEstimate obs = obstacles[*nearest_index];
    rec.obstacle_id = static_cast<std::int64_t>(obs.id);
    const Vec2 obstacle_world = state.ego.position + state.ego.to_world(obs.relative_position);
    const bool same_as_latched =
        state.manoeuvre && (obstacle_world - state.manoeuvre->obstacle_world).norm() < 2.0 * obs.radius + cfg.safety_margin;
    const Vec2 reference = state.manoeuvre ? state.ego.velocity : v_pref;
    obs.relative_velocity = state.ego.to_body(reference) - obs.obstacle_velocity;
    try {
      const double r_c = cfg.combined_radius(obs.radius);
      const CollisionCone cone = collision_cone(obs.relative_position, r_c);
      rec.half_angle = cone.half_angle;
      rec.in_cone = in_cone(obs.relative_velocity, cone);
      if (!same_as_latched) {
        const Vec2 offset = side_step(state.ego, obs, cfg);
        if (offset.squaredNorm() > 0.0) {
          // Pass side_step_distance beside the obstacle, never drifting back towards it.
          const double here = path.lateral(state.ego.position);
          const double clear_along = path.along(obstacle_world) + r_c;
          auto target_for = [&](double side) {
            const double beside = path.lateral(obstacle_world) + side;
            return side > 0.0 ? std::max(here, beside) : std::min(here, beside);
          };
          const double target = target_for(offset.dot(path.left));
          state.manoeuvre = SideStepManoeuvre{target, clear_along, obstacle_world};
          add_event(log, state, "side_step", rec.obstacle_id);
        }
      }
    } catch (const AlreadyInCollision&) {
      rec.in_cone = true;
      if (!state.manoeuvre) {
        // Too close to plan a step: stop until the picture changes.
        rec.mode = "emergency_stop";
        rec.command = Vec2::Zero();
        add_event(log, state, "emergency_stop", rec.obstacle_id);
        return rec;
      }
    }
  }

  if (state.manoeuvre) {
    rec.mode = "side_step";
    const double forward = world.max_speed * world.side_step_forward_fraction;
    const double error = state.manoeuvre->lateral_target - path.lateral(state.ego.position);
    // Keep the direction of travel well inside the field of view so the
    // sensor sees where the vehicle is going.
    const double max_lateral = forward * std::tan(world.side_step_fov_fraction * scenario.radar.fov_half_angle);
    const double lateral = std::clamp(world.side_step_gain * error, -max_lateral, max_lateral);
    rec.command = clip_speed(path.forward * forward + path.left * lateral, world.max_speed);
  }
  return rec;
}

void move(SimState& state, const WorldConfig& world, const Vec2& command) {
  const double dt = world.frame_period();
  Vec2 dv = (command - state.ego.velocity) * (1.0 - std::exp(-dt / world.lag_time_constant));
  const double max_dv = world.max_accel * dt;
  if (dv.norm() > max_dv) dv *= max_dv / dv.norm();
  state.ego.velocity += dv;
  state.ego.position += state.ego.velocity * dt;
}

TruthRecord truth_record(const SimState& state, const WorldConfig& world) {
  return {state.frame, state.time, state.ego.position, state.ego.heading, state.ego.velocity,
          clearance(world, state.ego.position, state.time)};
}

}  // namespace

const char* to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::reached_goal: return "reached_goal";
    case Outcome::collision: return "collision";
    case Outcome::timeout: return "timeout";
  }
  return "unknown";
}

std::size_t TrialLog::count_events(const std::string& kind) const {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(), [&](const EventRecord& e) { return e.kind == kind; }));
}

void WorldConfig::validate() const {
  if (!(arena_max.x() > arena_min.x() && arena_max.y() > arena_min.y()))
    throw ConfigError("world arena bounds are empty");
  const auto inside = [&](const Vec2& p) {
    return p.x() >= arena_min.x() && p.x() <= arena_max.x() && p.y() >= arena_min.y() && p.y() <= arena_max.y();
  };
  for (const Obstacle& o : obstacles) {
    if (!(o.radius > 0.0)) throw ConfigError("obstacle radius must be > 0");
    if (!inside(o.center)) throw ConfigError("obstacle centre outside the arena");
  }
  if (!inside(start) || !inside(goal)) throw ConfigError("start and goal must lie inside the arena");
  if (!(mav_radius > 0.0 && max_speed > 0.0 && max_accel > 0.0 && lag_time_constant > 0.0 && frame_rate > 0.0 &&
        timeout > 0.0 && goal_tolerance >= 0.0))
    throw ConfigError("world dynamics parameters must be positive");
  if (clearance(*this, start, 0.0) < 0.0) throw ConfigError("start pose collides with an obstacle");
  for (const Obstacle& o : obstacles) {
    if ((goal - o.center).norm() < o.radius + mav_radius) throw ConfigError("goal collides with an obstacle");
  }
  if (!(assumed_obstacle_radius > 0.0 && obstacle_memory >= 0.0 && side_step_forward_fraction >= 0.0 &&
        side_step_gain > 0.0 && side_step_fov_fraction > 0.0 && side_step_fov_fraction <= 1.0))
    throw ConfigError("world autopilot parameters out of range");
}

void Scenario::validate() const {
  radar.validate();
  detector.validate();
  tracker.validate();
  avoidance.validate();
  world.validate();
  if (batch.trials < 0 || !(batch.ring_radius > 0.0)) throw ConfigError("batch ring parameters out of range");
  if (sweep.bearing_steps < 2 || sweep.seeds_per_bearing < 1 || !(sweep.range > 0.0) || !(sweep.max_bearing > 0.0))
    throw ConfigError("sweep parameters out of range");
}

double clearance(const WorldConfig& world, const Vec2& position, double time) {
  double best = kInf;
  for (const Obstacle& o : world.obstacles) {
    best = std::min(best, (position - o.center_at(time)).norm() - (o.radius + world.mav_radius));
  }
  return best;
}

std::vector<TargetEcho> visible_echoes(const Scenario& scenario, const EgoState& ego, double time) {
  const RadarConfig& radar = scenario.radar;
  std::vector<TargetEcho> out;
  for (const Obstacle& o : scenario.world.obstacles) {
    const Vec2 centre = o.center_at(time);
    const Vec2 to_centre = centre - ego.position;
    const double d = to_centre.norm();
    if (d <= o.radius) continue;
    const PointTarget surface{centre - to_centre / d * o.radius, o.velocity, 1.0};
    const PolarKinematics k = relative_kinematics(ego, surface);
    if (k.range < radar.min_range || k.range > radar.max_range) continue;
    if (std::abs(k.bearing) > radar.fov_half_angle) continue;
    out.push_back({k.range, k.bearing, k.radial_velocity, surface.amplitude});
  }
  return out;
}

SimState initial_state(const Scenario& scenario) {
  SimState state{0, 0.0, {}, Tracker(scenario.tracker), Vec2::Zero(), std::nullopt, {}, std::nullopt};
  state.ego.position = scenario.world.start;
  const Vec2 d = scenario.world.goal - scenario.world.start;
  state.ego.heading = d.norm() > 0.0 ? std::atan2(d.y(), d.x()) : 0.0;
  return state;
}

void step(SimState& state, const Scenario& scenario, TrialLog& log) {
  const double dt = scenario.world.frame_period();

  const std::vector<Detection> detections = sense(state, scenario, log);
  std::vector<Measurement> measurements;
  measurements.reserve(detections.size());
  for (const Detection& d : detections) measurements.push_back(Measurement::from(d));

  const TrackerStepReport report = state.tracker.step(measurements, dt);
  for (const TrackerEvent& e : report.events) add_event(log, state, to_string(e.kind), static_cast<std::int64_t>(e.track_id));
  log_tracks(state, log);

  const std::vector<ObstacleEstimate> obstacles = perceived_obstacles(state, scenario);
  const CommandRecord cmd = decide(state, scenario, obstacles, log);
  if (cmd.in_cone) add_event(log, state, "cone_entry", cmd.obstacle_id);
  state.command = cmd.command;
  log.commands.push_back(cmd);

  move(state, scenario.world, state.command);
  ++state.frame;
  state.time = state.frame / scenario.world.frame_rate;
}

TrialLog run_trial(const Scenario& scenario, const std::string& trial_id) {
  scenario.validate();
  const WorldConfig& world = scenario.world;

  TrialLog log;
  log.trial_id = trial_id;
  log.seed = world.seed;

  SimState state = initial_state(scenario);
  const int max_frames = static_cast<int>(std::ceil(world.timeout * world.frame_rate));
  log.truth.push_back(truth_record(state, world));

  const auto finished = [&](const TruthRecord& rec) -> std::optional<Outcome> {
    if (rec.clearance < 0.0) return Outcome::collision;
    if ((world.goal - state.ego.position).norm() <= world.goal_tolerance) return Outcome::reached_goal;
    if (state.frame >= max_frames) return Outcome::timeout;
    return std::nullopt;
  };

  std::optional<Outcome> outcome = finished(log.truth.back());
  while (!outcome) {
    step(state, scenario, log);
    log.truth.push_back(truth_record(state, world));
    outcome = finished(log.truth.back());
  }
  if (*outcome == Outcome::collision) add_event(log, state, "collision", -1);

  log.outcome = *outcome;
  log.frames = state.frame;
  log.min_clearance = kInf;
  for (const TruthRecord& t : log.truth) log.min_clearance = std::min(log.min_clearance, t.clearance);
  return log;
}

std::vector<std::string> ring_trial_ids(int trials) {
  std::vector<std::string> ids;
  for (int i = 0; i < trials; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "trial_%03d", i);
    ids.emplace_back(buf);
  }
  return ids;
}

std::vector<Scenario> make_ring_batch(const Scenario& base, int trials) {
  std::vector<Scenario> out;
  out.reserve(static_cast<std::size_t>(std::max(trials, 0)));
  for (int i = 0; i < trials; ++i) {
    Scenario s = base;
    const double angle = base.batch.start_angle + 2.0 * std::numbers::pi * i / trials;
    const Vec2 radial(std::cos(angle), std::sin(angle));
    s.world.start = base.batch.ring_center + base.batch.ring_radius * radial;
    s.world.goal = base.batch.ring_center - base.batch.ring_radius * radial;
    s.world.seed = derive_seed(base.world.seed, static_cast<std::uint64_t>(i));
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TrialLog> run_batch(const std::vector<Scenario>& scenarios, const std::vector<std::string>& trial_ids,
                                int parallelism) {
  if (trial_ids.size() != scenarios.size()) throw std::invalid_argument("run_batch: one trial id per scenario");
  std::vector<TrialLog> logs(scenarios.size());
  const int workers = std::clamp(parallelism, 1, std::max<int>(1, static_cast<int>(scenarios.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < scenarios.size(); ++i) logs[i] = run_trial(scenarios[i], trial_ids[i]);
    return logs;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < scenarios.size(); i = next++) logs[i] = run_trial(scenarios[i], trial_ids[i]);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return logs;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need >= 2 paired samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 0.0;
  return fit;
}

}  // namespace radarnav
