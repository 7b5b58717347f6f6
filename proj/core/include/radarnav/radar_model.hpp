#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "radarnav/geometry.hpp"

namespace radarnav {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Temporary noise increase while the ego vehicle is (nearly) stationary.
struct HaltNoiseBurst {
  double duration = 1.0;         // s
  double multiplier = 2.0;       // applied to every noise std
  double speed_threshold = 0.05; // m/s
};

/// Sensor imperfections. Range/bearing perturbation std grows linearly with
/// |bearing|: std(theta) = base + slope * |theta|.
struct NoiseModel {
  double iq_noise_std = 0.0;
  double range_error_base = 0.0;     // m
  double range_error_slope = 0.0;    // m/rad
  double bearing_error_base = 0.0;   // rad
  double bearing_error_slope = 0.0;  // rad/rad
  double clutter_rate = 0.0;         // spurious detections per frame
  std::optional<HaltNoiseBurst> halt_noise_burst;

  void validate() const;

  double range_std(double bearing) const { return range_error_base + range_error_slope * std::abs(bearing); }
  double bearing_std(double bearing) const { return bearing_error_base + bearing_error_slope * std::abs(bearing); }
};

/// FMCW waveform and antenna geometry. Defaults describe a 24 GHz, 200 MHz
/// sawtooth radar with two receive antennas.
struct RadarConfig {
  double carrier_frequency = 24e9;    // Hz
  double bandwidth = 200e6;           // Hz
  double chirp_duration = 300e-6;     // s
  int samples_per_chirp = 256;
  int chirps_per_frame = 16;
  std::optional<double> antenna_spacing;  // m; unset selects lambda / 2
  double fov_half_angle = deg2rad(38.0);  // rad
  double min_range = 1.0;                 // m
  double max_range = 12.0;                // m
  bool range_amplitude_decay = false;     // scale echo amplitude by 1/R^2
  NoiseModel noise;

  double wavelength() const { return kSpeedOfLight / carrier_frequency; }
  double slope() const { return bandwidth / chirp_duration; }
  double sample_rate() const { return samples_per_chirp / chirp_duration; }
  double spacing() const { return antenna_spacing.value_or(0.5 * wavelength()); }
  double range_resolution() const { return kSpeedOfLight / (2.0 * bandwidth); }
  /// Largest |radial velocity| before Doppler phase wraps past pi.
  double max_unambiguous_velocity() const { return wavelength() / (4.0 * chirp_duration); }

  double beat_frequency(double range) const { return 2.0 * slope() * range / kSpeedOfLight; }
  double range_from_beat(double beat) const { return kSpeedOfLight * beat / (2.0 * slope()); }
  double doppler_phase_step(double radial_velocity) const {
    return 4.0 * std::numbers::pi * radial_velocity * chirp_duration / wavelength();
  }
  double velocity_from_phase_step(double phase_step) const {
    return wavelength() * phase_step / (4.0 * std::numbers::pi * chirp_duration);
  }
  double antenna_phase_offset(double bearing) const {
    return 2.0 * std::numbers::pi * spacing() * std::sin(bearing) / wavelength();
  }

  void validate() const;
};

struct PointTarget {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  double amplitude = 1.0;
};

/// Target as seen from the sensor. Radial velocity is positive when receding.
struct TargetEcho {
  double range = 0.0;
  double bearing = 0.0;
  double radial_velocity = 0.0;
  double amplitude = 1.0;
};

struct PolarKinematics {
  double range = 0.0;
  double bearing = 0.0;          // rad, positive left of boresight
  double radial_velocity = 0.0;  // m/s, positive receding
};

PolarKinematics relative_kinematics(const EgoState& ego, const PointTarget& target);

/// Complex baseband samples laid out [antenna][chirp][sample].
class IQFrame {
 public:
  static constexpr int kAntennas = 2;

  IQFrame() = default;
  IQFrame(int chirps, int samples, double timestamp = 0.0)
      : chirps_(chirps), samples_(samples), timestamp_(timestamp),
        data_(static_cast<std::size_t>(kAntennas) * chirps * samples) {}

  int antennas() const { return kAntennas; }
  int chirps() const { return chirps_; }
  int samples() const { return samples_; }
  double timestamp() const { return timestamp_; }
  void set_timestamp(double t) { timestamp_ = t; }

  std::complex<double>& at(int antenna, int chirp, int sample) { return data_[index(antenna, chirp, sample)]; }
  const std::complex<double>& at(int antenna, int chirp, int sample) const {
    return data_[index(antenna, chirp, sample)];
  }
  std::span<const std::complex<double>> chirp(int antenna, int chirp) const {
    return {data_.data() + index(antenna, chirp, 0), static_cast<std::size_t>(samples_)};
  }
  std::span<const std::complex<double>> data() const { return data_; }
  std::span<std::complex<double>> data() { return data_; }

  bool matches(const RadarConfig& cfg) const {
    return chirps_ == cfg.chirps_per_frame && samples_ == cfg.samples_per_chirp;
  }

  friend bool operator==(const IQFrame&, const IQFrame&) = default;

 private:
  std::size_t index(int antenna, int chirp, int sample) const {
    return (static_cast<std::size_t>(antenna) * chirps_ + chirp) * samples_ + sample;
  }

  int chirps_ = 0;
  int samples_ = 0;
  double timestamp_ = 0.0;
  std::vector<std::complex<double>> data_;
};

/// Builds the mixed IF signal for every echo on both receivers and adds
/// complex white Gaussian noise of std `config.noise.iq_noise_std * noise_multiplier`.
/// Deterministic for a given seed. Echoes must already be inside the sensor
/// window; throws ConfigError on a degenerate waveform.
IQFrame synthesize_frame(const RadarConfig& config, std::span<const TargetEcho> targets, std::uint64_t seed,
                         double timestamp = 0.0, double noise_multiplier = 1.0);

/// Applies the angle-dependent range/bearing perturbation of `noise` to a true
/// echo. `multiplier` scales both standard deviations.
TargetEcho perturb_echo(const TargetEcho& truth, const NoiseModel& noise, std::mt19937_64& rng,
                        double multiplier = 1.0);

/// Derives an independent stream seed from a base seed and a stream index.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace radarnav
