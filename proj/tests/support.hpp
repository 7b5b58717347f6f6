#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "radarnav/avoidance.hpp"
#include "radarnav/radar_model.hpp"
#include "radarnav/tracker.hpp"

namespace radarnav::testing {

inline const std::filesystem::path kScenarioDir = RADARNAV_SCENARIO_DIR;

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("radarnav_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Every regular file below `dir`, relative path -> bytes.
inline std::vector<std::pair<std::string, std::string>> snapshot(const std::filesystem::path& dir) {
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file())
      files.emplace_back(std::filesystem::relative(entry.path(), dir).string(), slurp(entry.path()));
  }
  std::sort(files.begin(), files.end());
  return files;
}

inline RadarConfig noise_free_radar() {
  RadarConfig radar;
  radar.noise = NoiseModel{};
  return radar;
}

/// Exhaustive minimum over injective row -> column maps (+inf if none is finite).
inline double brute_force_assignment(const Eigen::MatrixXd& cost) {
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  std::vector<char> used(static_cast<std::size_t>(cols), 0);
  double best = std::numeric_limits<double>::infinity();
  auto search = [&](auto&& self, int row, double acc) -> void {
    if (row == rows) {
      best = std::min(best, acc);
      return;
    }
    for (int c = 0; c < cols; ++c) {
      if (used[static_cast<std::size_t>(c)] || !std::isfinite(cost(row, c))) continue;
      used[static_cast<std::size_t>(c)] = 1;
      self(self, row + 1, acc + cost(row, c));
      used[static_cast<std::size_t>(c)] = 0;
    }
  };
  search(search, 0, 0.0);
  return best;
}

/// Each track either takes a distinct detection or pays its misdetection cost.
inline double brute_force_association(const Eigen::MatrixXd& association, const std::vector<double>& miss) {
  const int n = static_cast<int>(association.rows());
  const int m = static_cast<int>(association.cols());
  std::vector<char> used(static_cast<std::size_t>(m), 0);
  double best = std::numeric_limits<double>::infinity();
  auto search = [&](auto&& self, int track, double acc) -> void {
    if (track == n) {
      best = std::min(best, acc);
      return;
    }
    self(self, track + 1, acc + miss[static_cast<std::size_t>(track)]);
    for (int j = 0; j < m; ++j) {
      if (used[static_cast<std::size_t>(j)] || !std::isfinite(association(track, j))) continue;
      used[static_cast<std::size_t>(j)] = 1;
      self(self, track + 1, acc + association(track, j));
      used[static_cast<std::size_t>(j)] = 0;
    }
  };
  search(search, 0, 0.0);
  return best;
}

/// Closest approach of the relative trajectory p - v t over t >= 0.
inline double closest_approach(const Vec2& p, const Vec2& v) {
  const double vv = v.squaredNorm();
  const double t = vv > 0.0 ? std::max(0.0, p.dot(v) / vv) : 0.0;
  return (p - v * t).norm();
}

/// Collision oracle by integrating the relative motion: does it ever come within r_c?
inline bool collides(const Vec2& p, double combined_radius, const Vec2& relative_velocity) {
  return closest_approach(p, relative_velocity) < combined_radius;
}

/// Angle between v and p minus the cone half-angle; zero on the cone edge.
inline double cone_edge_gap(const Vec2& p, double combined_radius, const Vec2& v) {
  const double angle = std::acos(std::clamp(v.normalized().dot(p.normalized()), -1.0, 1.0));
  return angle - std::asin(combined_radius / p.norm());
}

/// Standalone covariance recursion of the polar constant-acceleration filter:
/// trace of the (r, theta) block after each frame of `hits` (true = updated).
inline std::vector<double> covariance_trace(const TrackerConfig& cfg, double dt, const std::vector<bool>& hits) {
  using M6 = Eigen::Matrix<double, 6, 6>;
  // state order (r, theta, r', theta', r'', theta'')
  M6 F = M6::Identity();
  for (int axis = 0; axis < 2; ++axis) {
    F(axis, axis + 2) = dt;
    F(axis, axis + 4) = dt * dt / 2.0;
    F(axis + 2, axis + 4) = dt;
  }
  // Q = q * integral over [0, dt] of g(s) g(s)' with g(s) = (s^2/2, s, 1), by Simpson's rule
  Eigen::Matrix3d block = Eigen::Matrix3d::Zero();
  const int steps = 200;
  for (int k = 0; k <= steps; ++k) {
    const double s = dt * k / steps;
    const double w = (k == 0 || k == steps) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    const Eigen::Vector3d gs(s * s / 2.0, s, 1.0);
    block += w * gs * gs.transpose();
  }
  block *= dt / (3.0 * steps);
  M6 Q = M6::Zero();
  for (int axis = 0; axis < 2; ++axis) {
    const double q = axis == 0 ? cfg.process_noise_range : cfg.process_noise_bearing;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) Q(axis + 2 * a, axis + 2 * b) = q * block(a, b);
  }
  Eigen::Matrix<double, 3, 6> H = Eigen::Matrix<double, 3, 6>::Zero();
  H(0, 0) = H(1, 1) = H(2, 2) = 1.0;
  const Eigen::Matrix3d R = cfg.measurement_noise;

  M6 P = M6::Zero();
  P.topLeftCorner<3, 3>() = R;
  P(3, 3) = cfg.initial_bearing_rate_std * cfg.initial_bearing_rate_std;
  P(4, 4) = cfg.initial_range_accel_std * cfg.initial_range_accel_std;
  P(5, 5) = cfg.initial_bearing_accel_std * cfg.initial_bearing_accel_std;

  std::vector<double> out;
  for (bool hit : hits) {
    P = F * P * F.transpose() + Q;
    if (hit) {
      const Eigen::Matrix3d S = H * P * H.transpose() + R;
      const Eigen::Matrix<double, 6, 3> K = P * H.transpose() * S.inverse();
      P = (M6::Identity() - K * H) * P;
    }
    out.push_back(P(0, 0) + P(1, 1));
  }
  return out;
}

}  // namespace radarnav::testing
