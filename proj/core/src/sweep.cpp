#include <cmath>
#include <limits>
#include <random>

#include "radarnav/sim.hpp"

namespace radarnav {

SweepResult error_sweep(const Scenario& scenario) {
  scenario.radar.validate();
  scenario.detector.validate();
  const SweepConfig& sweep = scenario.sweep;
  if (sweep.bearing_steps < 2 || sweep.seeds_per_bearing < 1) throw ConfigError("sweep needs >= 2 bearings and >= 1 seed");

  SweepResult result;
  std::vector<double> xs, range_errors, bearing_errors;
  for (int b = 0; b < sweep.bearing_steps; ++b) {
    const double bearing = sweep.max_bearing * b / (sweep.bearing_steps - 1);
    const TargetEcho truth{sweep.range, bearing, 0.0, 1.0};

    SweepRow row;
    row.bearing = bearing;
    double range_sum = 0.0;
    double bearing_sum = 0.0;
    for (int s = 0; s < sweep.seeds_per_bearing; ++s) {
      const auto stream = static_cast<std::uint64_t>(b) * static_cast<std::uint64_t>(sweep.seeds_per_bearing) +
                          static_cast<std::uint64_t>(s);
      std::mt19937_64 rng(derive_seed(scenario.world.seed, 2 * stream));
      const TargetEcho noisy = perturb_echo(truth, scenario.radar.noise, rng);
      const IQFrame frame = synthesize_frame(scenario.radar, std::span(&noisy, 1), derive_seed(scenario.world.seed, 2 * stream + 1));
      const auto detections = process_frame(scenario.radar, scenario.detector, frame);

      const Detection* best = nullptr;
      double best_gap = std::numeric_limits<double>::infinity();
      for (const Detection& d : detections) {
        const double gap = std::abs(d.range - truth.range);
        if (gap < best_gap) {
          best_gap = gap;
          best = &d;
        }
      }
      if (best == nullptr) {
        ++row.missed;
        continue;
      }
      ++row.detected;
      range_sum += std::abs(best->range - truth.range);
      bearing_sum += std::abs(wrap_angle(best->bearing - truth.bearing));
    }
    if (row.detected > 0) {
      row.range_error = range_sum / row.detected;
      row.bearing_error = bearing_sum / row.detected;
      xs.push_back(row.bearing);
      range_errors.push_back(row.range_error);
      bearing_errors.push_back(row.bearing_error);
    }
    result.rows.push_back(row);
  }
  if (xs.size() >= 2) {
    result.range_fit = fit_line(xs, range_errors);
    result.bearing_fit = fit_line(xs, bearing_errors);
  }
  return result;
}

}  // namespace radarnav
