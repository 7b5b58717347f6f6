#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>

#include "radarnav/geometry.hpp"

namespace radarnav {

/// Obstacle B as seen from the vehicle A, all vectors in one common frame.
struct ObstacleEstimate {
  Vec2 relative_position = Vec2::Zero();  // centre of B minus A, m
  Vec2 relative_velocity = Vec2::Zero();  // V_A - V_B, m/s
  Vec2 obstacle_velocity = Vec2::Zero();  // V_B, m/s
  double radius = 0.25;                   // m
  std::uint64_t id = 0;
};

/// Velocity-space cone of relative velocities leading to collision. Apex at
/// the origin, axis towards the obstacle.
struct CollisionCone {
  Vec2 axis = Vec2::UnitX();  // unit vector
  double half_angle = 0.0;    // rad, in [0, pi/2)
  double distance = 0.0;      // |p|, m

  Vec2 left_edge() const { return rotate(axis, half_angle); }
  Vec2 right_edge() const { return rotate(axis, -half_angle); }
};

class AlreadyInCollision : public std::runtime_error {
 public:
  AlreadyInCollision() : std::runtime_error("obstacle within combined radius: already in collision") {}
};

enum class AvoidanceMode { velocity_obstacle, side_step };

const char* to_string(AvoidanceMode mode);

struct AvoidanceConfig {
  double mav_radius = 0.15;      // m
  double safety_margin = 0.2;    // m
  double max_speed = 1.0;        // m/s
  double max_turn_rate = 3.14159;  // rad/s
  AvoidanceMode mode = AvoidanceMode::side_step;
  double side_step_distance = 1.0;  // m

  double combined_radius(double obstacle_radius) const { return mav_radius + obstacle_radius + safety_margin; }
  void validate() const;
};

/// Throws AlreadyInCollision when |p| <= combined_radius.
CollisionCone collision_cone(const Vec2& relative_position, double combined_radius);

/// Strictly inside: the cone boundary itself counts as safe, as does V_AB = 0.
bool in_cone(const Vec2& relative_velocity, const CollisionCone& cone);

struct AvoidanceCommand {
  Vec2 velocity = Vec2::Zero();  // commanded V_A
  bool in_cone = false;          // input V_AB was inside the cone
  bool unresolved = false;       // no reachable velocity left the cone
  double half_angle = 0.0;
};

/// If V_AB = V_A - V_B is inside the cone, moves it onto the nearer cone edge
/// (ties go right), adds V_B back and enforces the speed and turn-rate limits
/// (turn measured from V_A over one control period dt). Throws
/// AlreadyInCollision.
AvoidanceCommand avoid(const Vec2& ego_velocity, const ObstacleEstimate& obstacle, const AvoidanceConfig& config,
                       double dt);

/// Index of the obstacle with smallest |p|; first wins on ties.
std::optional<std::size_t> select_nearest(std::span<const ObstacleEstimate> obstacles);

/// Lateral offset of config.side_step_distance, perpendicular to `heading` and
/// away from the obstacle (obstacle on the left or dead ahead -> step right).
/// Zero when the relative velocity is outside the collision cone. Obstacle
/// vectors are in the body frame, the result in the world frame.
Vec2 side_step(const EgoState& ego, const ObstacleEstimate& obstacle, const AvoidanceConfig& config);

}  // namespace radarnav
