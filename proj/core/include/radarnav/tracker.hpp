#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "radarnav/detector.hpp"
#include "radarnav/geometry.hpp"

namespace radarnav {

/// Polar state in the sensor frame: (r, theta, r_dot, theta_dot, r_ddot, theta_ddot).
using StateVector = Eigen::Matrix<double, 6, 1>;
using StateMatrix = Eigen::Matrix<double, 6, 6>;
using MeasurementVector = Eigen::Vector3d;  // (r, theta, r_dot)
using MeasurementMatrix = Eigen::Matrix3d;

namespace state_index {
inline constexpr int range = 0;
inline constexpr int bearing = 1;
inline constexpr int range_rate = 2;
inline constexpr int bearing_rate = 3;
inline constexpr int range_accel = 4;
inline constexpr int bearing_accel = 5;
}  // namespace state_index

struct Measurement {
  MeasurementVector z = MeasurementVector::Zero();
  double timestamp = 0.0;

  static Measurement from(const Detection& d) {
    return {MeasurementVector(d.range, d.bearing, d.radial_velocity), d.timestamp};
  }
};

struct TrackState {
  StateVector x = StateVector::Zero();
  StateMatrix P = StateMatrix::Identity();

  /// Trace of the (r, theta) block of P; the birth/death score.
  double position_score() const { return P(0, 0) + P(1, 1); }
};

enum class TrackStatus { candidate, confirmed };

struct Track {
  std::uint64_t id = 0;
  TrackState state;
  TrackStatus status = TrackStatus::candidate;
  double last_update = 0.0;

  bool confirmed() const { return status == TrackStatus::confirmed; }
};

struct TrackerConfig {
  double detection_probability = 0.9;
  double gate_threshold = 4.0;     // Mahalanobis distance
  double birth_threshold = 0.03;   // position_score below which a candidate is confirmed
  double death_threshold = 0.15;   // position_score above which any track is deleted
  double process_noise_range = 1.0;    // white-jerk intensity, m^2/s^5
  double process_noise_bearing = 0.5;  // white-jerk intensity, rad^2/s^5
  // Wider than the raw sensor noise so it also covers Doppler-bin quantization.
  MeasurementMatrix measurement_noise =
      MeasurementVector(0.25 * 0.25, deg2rad(5.0) * deg2rad(5.0), 0.75 * 0.75).asDiagonal();
  // Candidate prior std for the unobserved components.
  double initial_bearing_rate_std = 0.5;   // rad/s
  double initial_range_accel_std = 1.0;    // m/s^2
  double initial_bearing_accel_std = 1.0;  // rad/s^2
  double singular_inflation = 2.0;  // covariance factor when S cannot be inverted

  void validate() const;
};

struct Innovation {
  MeasurementVector residual = MeasurementVector::Zero();
  MeasurementMatrix S = MeasurementMatrix::Zero();
};

/// Track-by-detection cost layout [association | misdetection]; rows are
/// tracks. Association block holds 0.5 * r' S^-1 r (or +inf when gated), the
/// misdetection block is diagonal -log(1 - P_D) with +inf elsewhere.
struct CostMatrix {
  Eigen::MatrixXd L;
  int tracks = 0;
  int detections = 0;

  double association(int track, int detection) const { return L(track, detection); }
  double misdetection(int track) const { return L(track, detections + track); }
};

struct AssociationResult {
  std::vector<std::optional<int>> track_to_detection;  // nullopt = misdetected
  std::vector<int> unassigned_detections;
  double total_cost = 0.0;
};

struct TrackerEvent {
  enum class Kind { birth, confirmation, death, singular_innovation };
  Kind kind;
  std::uint64_t track_id;
};

const char* to_string(TrackerEvent::Kind kind);
const char* to_string(TrackStatus status);

StateMatrix transition_matrix(double dt);
StateMatrix process_noise(double dt, const TrackerConfig& config);

/// Constant-acceleration prediction. Requires dt > 0.
Track predict(const Track& track, double dt, const TrackerConfig& config);

/// Residual z - Hx with the bearing component wrapped to (-pi, pi], and S = HPH' + R.
Innovation innovation(const Track& track, const Measurement& z, const TrackerConfig& config);

/// Tracks must already be predicted to the measurement time. Pairs whose S
/// cannot be inverted are gated and reported through `events`.
CostMatrix build_cost_matrix(std::span<const Track> tracks, std::span<const Measurement> measurements,
                             const TrackerConfig& config, std::vector<TrackerEvent>* events = nullptr);

AssociationResult solve_assignment(const CostMatrix& cost);

/// Kalman update with Joseph-form covariance. A singular S skips the update
/// and inflates P by config.singular_inflation.
Track update(const Track& track, const Measurement& z, const TrackerConfig& config,
             std::vector<TrackerEvent>* events = nullptr);

Track make_candidate(std::uint64_t id, const Measurement& z, const TrackerConfig& config);

struct RelativeObstacle {
  Vec2 position = Vec2::Zero();  // sensor frame, m
  Vec2 velocity = Vec2::Zero();  // d(position)/dt in the sensor frame, m/s
};

RelativeObstacle track_to_obstacle(const Track& track);

/// Per-frame bookkeeping returned from Tracker::step.
struct TrackerStepReport {
  AssociationResult association;            // indexed like the tracks before lifecycle changes
  std::vector<std::uint64_t> associated_ids;  // track id per association row
  std::vector<TrackerEvent> events;
};

/// Owns the track list and the id counter for one run. Ids are never reused.
class Tracker {
 public:
  explicit Tracker(TrackerConfig config = {});

  /// predict -> cost matrix -> assignment -> update / coast -> lifecycle.
  TrackerStepReport step(std::span<const Measurement> measurements, double dt);

  /// Confirmation / deletion by covariance score, then one candidate per
  /// unassigned measurement.
  void manage_lifecycle(std::span<const Measurement> unassigned, std::vector<TrackerEvent>& events);

  const std::vector<Track>& tracks() const { return tracks_; }
  const TrackerConfig& config() const { return config_; }
  std::size_t confirmed_count() const;
  /// Measurement index assigned to `track_id` in the last step, if any.
  std::optional<int> assigned_detection(std::uint64_t track_id) const;

 private:
  TrackerConfig config_;
  std::vector<Track> tracks_;
  std::uint64_t next_id_ = 1;
  std::vector<std::pair<std::uint64_t, int>> last_assignment_;
};

}  // namespace radarnav
