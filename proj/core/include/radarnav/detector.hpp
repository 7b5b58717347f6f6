#pragma once

#include <complex>
#include <span>
#include <vector>

#include "radarnav/radar_model.hpp"

namespace radarnav {

enum class Window { rectangular, hann };

struct DetectorConfig {
  int range_zero_pad = 4;
  int doppler_zero_pad = 1;
  Window range_window = Window::hann;
  /// Minimum noncoherent (two-antenna) magnitude for a peak. FFT outputs are
  /// normalized so that a unit-amplitude echo centred on a bin yields 1 per
  /// antenna, i.e. 2 after summation.
  double threshold = 0.5;
  bool range_interpolation = true;

  void validate() const;
};

/// Range-Doppler cells for one antenna. Rows are Doppler bins (zero velocity at
/// row doppler_bins / 2), columns are range bins covering beat frequencies in
/// [0, sample_rate / 2).
class RangeDopplerMap {
 public:
  RangeDopplerMap() = default;
  RangeDopplerMap(int doppler_bins, int range_bins, double range_per_bin, double velocity_per_bin)
      : doppler_bins_(doppler_bins), range_bins_(range_bins), range_per_bin_(range_per_bin),
        velocity_per_bin_(velocity_per_bin),
        cells_(static_cast<std::size_t>(doppler_bins) * range_bins) {}

  int doppler_bins() const { return doppler_bins_; }
  int range_bins() const { return range_bins_; }
  double range_per_bin() const { return range_per_bin_; }
  double velocity_per_bin() const { return velocity_per_bin_; }
  int zero_doppler_row() const { return doppler_bins_ / 2; }

  std::complex<double>& at(int doppler, int range) { return cells_[idx(doppler, range)]; }
  const std::complex<double>& at(int doppler, int range) const { return cells_[idx(doppler, range)]; }

  double range_of(double range_bin) const { return range_bin * range_per_bin_; }
  double velocity_of(double doppler_bin) const { return (doppler_bin - zero_doppler_row()) * velocity_per_bin_; }
  int range_bin_of(double range) const;
  int doppler_bin_of(double velocity) const;

 private:
  std::size_t idx(int d, int r) const { return static_cast<std::size_t>(d) * range_bins_ + r; }

  int doppler_bins_ = 0;
  int range_bins_ = 0;
  double range_per_bin_ = 0.0;
  double velocity_per_bin_ = 0.0;
  std::vector<std::complex<double>> cells_;
};

/// Real-valued grid with the same layout as RangeDopplerMap.
struct MagnitudeMap {
  int doppler_bins = 0;
  int range_bins = 0;
  std::vector<double> values;

  double at(int doppler, int range) const { return values[static_cast<std::size_t>(doppler) * range_bins + range]; }
};

struct Peak {
  int range_bin = 0;
  int doppler_bin = 0;
  double magnitude = 0.0;

  friend bool operator==(const Peak&, const Peak&) = default;
};

struct Detection {
  double range = 0.0;            // m
  double bearing = 0.0;          // rad
  double radial_velocity = 0.0;  // m/s, positive receding
  double magnitude = 0.0;
  double timestamp = 0.0;        // s
};

/// Windowed, zero-padded fast-time FFT of one chirp, normalized by the window
/// sum. Returns samples * zero_pad bins.
std::vector<std::complex<double>> range_fft(const IQFrame& frame, int antenna, int chirp, int zero_pad,
                                            Window window = Window::hann);

/// Slow-time FFT per range bin over equal-length chirp spectra. Keeps the
/// positive-frequency half of each spectrum, normalizes by the chirp count and
/// centres zero Doppler.
RangeDopplerMap doppler_fft(std::span<const std::vector<std::complex<double>>> spectra, const RadarConfig& config,
                            int doppler_zero_pad = 1);

MagnitudeMap magnitude(const RangeDopplerMap& map);
MagnitudeMap noncoherent_sum(const RangeDopplerMap& rx1, const RangeDopplerMap& rx2);

/// Threshold + 8-neighbourhood local maxima restricted to range bins in
/// [min_range_bin, max_range_bin]. At most two peaks survive per range bin,
/// the two strongest. Among exactly equal neighbours the first cell in
/// row-major order wins. Output is sorted by (range_bin, doppler_bin).
std::vector<Peak> detect_peaks(const MagnitudeMap& map, double threshold, int min_range_bin, int max_range_bin);

/// Phase-comparison bearing from two receivers spaced `spacing_wavelengths`
/// wavelengths apart (0.5 gives the full +-90 degree domain).
double estimate_bearing(const RangeDopplerMap& rx1, const RangeDopplerMap& rx2, const Peak& cell,
                        double spacing_wavelengths = 0.5);
double bearing_from_phase_difference(double phase_difference, double spacing_wavelengths = 0.5);

/// Intermediate products of one processed frame, kept for debugging dumps.
struct FrameProducts {
  std::vector<RangeDopplerMap> maps;  // one per antenna
  MagnitudeMap combined;
  std::vector<Peak> peaks;
  std::vector<Detection> detections;
};

FrameProducts process_frame_detailed(const RadarConfig& config, const DetectorConfig& detector, const IQFrame& frame);

/// Full detection chain: range FFT, Doppler FFT, peak picking on the summed
/// magnitude, bearing per peak, bin-to-physical conversion. Throws ConfigError
/// if the frame shape disagrees with the config.
std::vector<Detection> process_frame(const RadarConfig& config, const DetectorConfig& detector, const IQFrame& frame);

}  // namespace radarnav
