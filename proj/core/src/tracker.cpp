#include "radarnav/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "radarnav/assignment.hpp"

namespace radarnav {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::Matrix<double, 3, 6> observation_matrix() {
  Eigen::Matrix<double, 3, 6> H = Eigen::Matrix<double, 3, 6>::Zero();
  H(0, state_index::range) = 1.0;
  H(1, state_index::bearing) = 1.0;
  H(2, state_index::range_rate) = 1.0;
  return H;
}

// (value, rate, accel) index triples for the two polar coordinates.
constexpr int kRangeAxis[3] = {state_index::range, state_index::range_rate, state_index::range_accel};
constexpr int kBearingAxis[3] = {state_index::bearing, state_index::bearing_rate, state_index::bearing_accel};

}  // namespace

void TrackerConfig::validate() const {
  if (!(detection_probability > 0.0 && detection_probability < 1.0))
    throw std::invalid_argument("tracker.detection_probability must lie in (0, 1)");
  if (!(gate_threshold > 0.0)) throw std::invalid_argument("tracker.gate_threshold must be > 0");
  if (!(birth_threshold > 0.0 && birth_threshold < death_threshold))
    throw std::invalid_argument("tracker thresholds must satisfy 0 < birth < death");
  if (!(process_noise_range >= 0.0 && process_noise_bearing >= 0.0))
    throw std::invalid_argument("tracker process noise must be >= 0");
  if (!(singular_inflation >= 1.0)) throw std::invalid_argument("tracker.singular_inflation must be >= 1");
  if (!measurement_noise.isApprox(measurement_noise.transpose()))
    throw std::invalid_argument("tracker.measurement_noise must be symmetric");
}

const char* to_string(TrackerEvent::Kind kind) {
  switch (kind) {
    case TrackerEvent::Kind::birth: return "birth";
    case TrackerEvent::Kind::confirmation: return "confirmation";
    case TrackerEvent::Kind::death: return "death";
    case TrackerEvent::Kind::singular_innovation: return "singular_innovation";
  }
  return "unknown";
}

const char* to_string(TrackStatus status) {
  return status == TrackStatus::confirmed ? "confirmed" : "candidate";
}

StateMatrix transition_matrix(double dt) {
  StateMatrix F = StateMatrix::Identity();
  for (const auto& axis : {kRangeAxis, kBearingAxis}) {
    F(axis[0], axis[1]) = dt;
    F(axis[0], axis[2]) = 0.5 * dt * dt;
    F(axis[1], axis[2]) = dt;
  }
  return F;
}

StateMatrix process_noise(double dt, const TrackerConfig& config) {
  const double dt2 = dt * dt;
  const double dt3 = dt2 * dt;
  const double dt4 = dt3 * dt;
  const double dt5 = dt4 * dt;
  // continuous white jerk, discretized
  const Eigen::Matrix3d block{{dt5 / 20.0, dt4 / 8.0, dt3 / 6.0},
                              {dt4 / 8.0, dt3 / 3.0, dt2 / 2.0},
                              {dt3 / 6.0, dt2 / 2.0, dt}};
  StateMatrix Q = StateMatrix::Zero();
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      Q(kRangeAxis[a], kRangeAxis[b]) = config.process_noise_range * block(a, b);
      Q(kBearingAxis[a], kBearingAxis[b]) = config.process_noise_bearing * block(a, b);
    }
  }
  return Q;
}

Track predict(const Track& track, double dt, const TrackerConfig& config) {
  if (!(dt > 0.0)) throw std::invalid_argument("predict: dt must be > 0");
  const StateMatrix F = transition_matrix(dt);
  Track out = track;
  out.state.x = F * track.state.x;
  out.state.x(state_index::range) = std::max(0.0, out.state.x(state_index::range));
  out.state.P = F * track.state.P * F.transpose() + process_noise(dt, config);
  out.state.P = 0.5 * (out.state.P + out.state.P.transpose());
  return out;
}

Innovation innovation(const Track& track, const Measurement& z, const TrackerConfig& config) {
  const auto H = observation_matrix();
  Innovation out;
  out.residual = z.z - H * track.state.x;
  out.residual(1) = wrap_angle(out.residual(1));
  out.S = H * track.state.P * H.transpose() + config.measurement_noise;
  return out;
}

CostMatrix build_cost_matrix(std::span<const Track> tracks, std::span<const Measurement> measurements,
                             const TrackerConfig& config, std::vector<TrackerEvent>* events) {
  const int n = static_cast<int>(tracks.size());
  const int m = static_cast<int>(measurements.size());
  CostMatrix cost;
  cost.tracks = n;
  cost.detections = m;
  cost.L = Eigen::MatrixXd::Constant(n, m + n, kInf);

  const double miss_cost = -std::log(1.0 - config.detection_probability);
  const double gate_sq = config.gate_threshold * config.gate_threshold;
  for (int i = 0; i < n; ++i) {
    cost.L(i, m + i) = miss_cost;
    bool singular_reported = false;
    for (int j = 0; j < m; ++j) {
      const Innovation inn = innovation(tracks[static_cast<std::size_t>(i)], measurements[static_cast<std::size_t>(j)], config);
      const Eigen::LLT<MeasurementMatrix> llt(inn.S);
      if (llt.info() != Eigen::Success) {
        if (events && !singular_reported) {
          events->push_back({TrackerEvent::Kind::singular_innovation, tracks[static_cast<std::size_t>(i)].id});
          singular_reported = true;
        }
        continue;
      }
      const double d2 = inn.residual.dot(llt.solve(inn.residual));
      if (!std::isfinite(d2) || d2 > gate_sq) continue;
      cost.L(i, j) = 0.5 * d2;
    }
  }
  return cost;
}

AssociationResult solve_assignment(const CostMatrix& cost) {
  AssociationResult out;
  out.track_to_detection.assign(static_cast<std::size_t>(cost.tracks), std::nullopt);
  std::vector<char> taken(static_cast<std::size_t>(cost.detections), 0);
  if (cost.tracks > 0) {
    const AssignmentResult solved = solve_linear_assignment(cost.L);
    out.total_cost = solved.total_cost;
    for (int i = 0; i < cost.tracks; ++i) {
      const int col = solved.row_to_col[static_cast<std::size_t>(i)];
      if (col < cost.detections) {
        out.track_to_detection[static_cast<std::size_t>(i)] = col;
        taken[static_cast<std::size_t>(col)] = 1;
      }
    }
  }
  for (int j = 0; j < cost.detections; ++j)
    if (!taken[static_cast<std::size_t>(j)]) out.unassigned_detections.push_back(j);
  return out;
}

Track update(const Track& track, const Measurement& z, const TrackerConfig& config, std::vector<TrackerEvent>* events) {
  const auto H = observation_matrix();
  const Innovation inn = innovation(track, z, config);
  Track out = track;

  const Eigen::LLT<MeasurementMatrix> llt(inn.S);
  if (llt.info() != Eigen::Success) {
    out.state.P *= config.singular_inflation;
    if (events) events->push_back({TrackerEvent::Kind::singular_innovation, track.id});
    return out;
  }
  // K = P H' S^-1
  const Eigen::Matrix<double, 6, 3> PHt = track.state.P * H.transpose();
  const Eigen::Matrix<double, 6, 3> K = llt.solve(PHt.transpose()).transpose();

  out.state.x = track.state.x + K * inn.residual;
  out.state.x(state_index::bearing) = wrap_angle(out.state.x(state_index::bearing));
  out.state.x(state_index::range) = std::max(0.0, out.state.x(state_index::range));

  const StateMatrix I_KH = StateMatrix::Identity() - K * H;
  out.state.P = I_KH * track.state.P * I_KH.transpose() + K * config.measurement_noise * K.transpose();
  out.state.P = 0.5 * (out.state.P + out.state.P.transpose());
  out.last_update = z.timestamp;
  return out;
}

Track make_candidate(std::uint64_t id, const Measurement& z, const TrackerConfig& config) {
  Track t;
  t.id = id;
  t.status = TrackStatus::candidate;
  t.last_update = z.timestamp;
  t.state.x.setZero();
  t.state.x(state_index::range) = z.z(0);
  t.state.x(state_index::bearing) = z.z(1);
  t.state.x(state_index::range_rate) = z.z(2);
  t.state.P.setZero();
  t.state.P.topLeftCorner<3, 3>() = config.measurement_noise;
  t.state.P(state_index::bearing_rate, state_index::bearing_rate) =
      config.initial_bearing_rate_std * config.initial_bearing_rate_std;
  t.state.P(state_index::range_accel, state_index::range_accel) =
      config.initial_range_accel_std * config.initial_range_accel_std;
  t.state.P(state_index::bearing_accel, state_index::bearing_accel) =
      config.initial_bearing_accel_std * config.initial_bearing_accel_std;
  return t;
}

RelativeObstacle track_to_obstacle(const Track& track) {
  const auto& x = track.state.x;
  const double r = x(state_index::range);
  const double theta = x(state_index::bearing);
  const double r_dot = x(state_index::range_rate);
  const double theta_dot = x(state_index::bearing_rate);
  const Vec2 radial(std::cos(theta), std::sin(theta));
  const Vec2 tangential(-std::sin(theta), std::cos(theta));
  return {r * radial, r_dot * radial + r * theta_dot * tangential};
}

Tracker::Tracker(TrackerConfig config) : config_(std::move(config)) { config_.validate(); }

std::size_t Tracker::confirmed_count() const {
  return static_cast<std::size_t>(std::count_if(tracks_.begin(), tracks_.end(), [](const Track& t) { return t.confirmed(); }));
}

std::optional<int> Tracker::assigned_detection(std::uint64_t track_id) const {
  for (const auto& [id, det] : last_assignment_)
    if (id == track_id) return det;
  return std::nullopt;
}

void Tracker::manage_lifecycle(std::span<const Measurement> unassigned, std::vector<TrackerEvent>& events) {
  std::vector<Track> kept;
  kept.reserve(tracks_.size() + unassigned.size());
  for (Track& t : tracks_) {
    const double score = t.state.position_score();
    if (!std::isfinite(score) || score > config_.death_threshold || !t.state.x.allFinite()) {
      events.push_back({TrackerEvent::Kind::death, t.id});
      continue;
    }
    if (t.status == TrackStatus::candidate && score < config_.birth_threshold) {
      t.status = TrackStatus::confirmed;
      events.push_back({TrackerEvent::Kind::confirmation, t.id});
    }
    kept.push_back(std::move(t));
  }
  for (const Measurement& z : unassigned) {
    kept.push_back(make_candidate(next_id_, z, config_));
    events.push_back({TrackerEvent::Kind::birth, next_id_});
    ++next_id_;
  }
  tracks_ = std::move(kept);
}

TrackerStepReport Tracker::step(std::span<const Measurement> measurements, double dt) {
  TrackerStepReport report;
  for (Track& t : tracks_) t = predict(t, dt, config_);

  const CostMatrix cost = build_cost_matrix(tracks_, measurements, config_, &report.events);
  report.association = solve_assignment(cost);

  last_assignment_.clear();
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    report.associated_ids.push_back(tracks_[i].id);
    if (const auto det = report.association.track_to_detection[i]) {
      tracks_[i] = update(tracks_[i], measurements[static_cast<std::size_t>(*det)], config_, &report.events);
      last_assignment_.emplace_back(tracks_[i].id, *det);
    }
  }

  std::vector<Measurement> unassigned;
  for (int j : report.association.unassigned_detections) unassigned.push_back(measurements[static_cast<std::size_t>(j)]);
  manage_lifecycle(unassigned, report.events);
  return report;
}

}  // namespace radarnav
