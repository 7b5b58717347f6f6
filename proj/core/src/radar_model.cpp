#include "radarnav/radar_model.hpp"

#include <cmath>
#include <string>

namespace radarnav {

void NoiseModel::validate() const {
  const auto check = [](double v, const char* name) {
    if (!(v >= 0.0)) throw ConfigError(std::string("noise.") + name + " must be >= 0");
  };
  check(iq_noise_std, "iq_noise_std");
  check(range_error_base, "range_error_base");
  check(range_error_slope, "range_error_slope");
  check(bearing_error_base, "bearing_error_base");
  check(bearing_error_slope, "bearing_error_slope");
  check(clutter_rate, "clutter_rate");
  if (halt_noise_burst) {
    check(halt_noise_burst->duration, "halt_noise_burst.duration");
    check(halt_noise_burst->multiplier, "halt_noise_burst.multiplier");
    check(halt_noise_burst->speed_threshold, "halt_noise_burst.speed_threshold");
  }
}

void RadarConfig::validate() const {
  if (!(carrier_frequency > 0.0)) throw ConfigError("radar.carrier_frequency must be > 0");
  if (!(bandwidth > 0.0)) throw ConfigError("radar.bandwidth must be > 0");
  if (!(chirp_duration > 0.0)) throw ConfigError("radar.chirp_duration must be > 0");
  if (samples_per_chirp < 2) throw ConfigError("radar.samples_per_chirp must be >= 2");
  if (chirps_per_frame < 2) throw ConfigError("radar.chirps_per_frame must be >= 2 for Doppler processing");
  if (antenna_spacing && !(*antenna_spacing > 0.0)) throw ConfigError("radar.antenna_spacing must be > 0");
  if (!(fov_half_angle > 0.0 && fov_half_angle <= std::numbers::pi / 2))
    throw ConfigError("radar.fov_half_angle must lie in (0, 90] degrees");
  if (!(min_range >= 0.0 && max_range > min_range)) throw ConfigError("radar range window must satisfy 0 <= min < max");
  noise.validate();
}

PolarKinematics relative_kinematics(const EgoState& ego, const PointTarget& target) {
  const Vec2 offset = target.position - ego.position;
  const Vec2 rel_velocity = target.velocity - ego.velocity;
  const double range = offset.norm();
  const Vec2 body = ego.to_body(offset);

  PolarKinematics out;
  out.range = range;
  out.bearing = range > 0.0 ? std::atan2(body.y(), body.x()) : 0.0;
  out.radial_velocity = range > 0.0 ? offset.dot(rel_velocity) / range : 0.0;
  return out;
}

IQFrame synthesize_frame(const RadarConfig& config, std::span<const TargetEcho> targets, std::uint64_t seed,
                         double timestamp, double noise_multiplier) {
  config.validate();
  const int chirps = config.chirps_per_frame;
  const int samples = config.samples_per_chirp;
  IQFrame frame(chirps, samples, timestamp);

  const double sample_period = 1.0 / config.sample_rate();
  for (const TargetEcho& echo : targets) {
    double amplitude = echo.amplitude;
    if (config.range_amplitude_decay && echo.range > 0.0) amplitude /= echo.range * echo.range;

    // Phase per sample (range), per chirp (Doppler) and per antenna (bearing).
    const double sample_step = 2.0 * std::numbers::pi * config.beat_frequency(echo.range) * sample_period;
    const double chirp_step = config.doppler_phase_step(echo.radial_velocity);
    const double antenna_step = config.antenna_phase_offset(echo.bearing);

    for (int a = 0; a < IQFrame::kAntennas; ++a) {
      for (int c = 0; c < chirps; ++c) {
        const double base = a * antenna_step + c * chirp_step;
        for (int n = 0; n < samples; ++n) {
          frame.at(a, c, n) += std::polar(amplitude, base + n * sample_step);
        }
      }
    }
  }

  const double sigma = config.noise.iq_noise_std * noise_multiplier;
  if (sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> component(0.0, sigma / std::sqrt(2.0));
    for (auto& v : frame.data()) {
      const double re = component(rng);
      const double im = component(rng);
      v += std::complex<double>(re, im);
    }
  }
  return frame;
}

TargetEcho perturb_echo(const TargetEcho& truth, const NoiseModel& noise, std::mt19937_64& rng, double multiplier) {
  std::normal_distribution<double> unit(0.0, 1.0);
  TargetEcho out = truth;
  const double range_sigma = noise.range_std(truth.bearing) * multiplier;
  const double bearing_sigma = noise.bearing_std(truth.bearing) * multiplier;
  // Always draw both samples so the stream layout does not depend on the model.
  const double dr = unit(rng);
  const double db = unit(rng);
  out.range = std::max(0.0, truth.range + range_sigma * dr);
  constexpr double kBearingLimit = std::numbers::pi / 2 - 1e-6;
  out.bearing = std::clamp(truth.bearing + bearing_sigma * db, -kBearingLimit, kBearingLimit);
  return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 over the combined value
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace radarnav
