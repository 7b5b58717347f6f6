#include "radarnav/detector.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "radarnav/fft.hpp"

namespace radarnav {

void DetectorConfig::validate() const {
  if (range_zero_pad < 1) throw ConfigError("detector.range_zero_pad must be >= 1");
  if (doppler_zero_pad < 1) throw ConfigError("detector.doppler_zero_pad must be >= 1");
  if (!(threshold > 0.0)) throw ConfigError("detector.threshold must be > 0");
}

int RangeDopplerMap::range_bin_of(double range) const {
  return static_cast<int>(std::lround(range / range_per_bin_));
}

int RangeDopplerMap::doppler_bin_of(double velocity) const {
  return static_cast<int>(std::lround(velocity / velocity_per_bin_)) + zero_doppler_row();
}

std::vector<std::complex<double>> range_fft(const IQFrame& frame, int antenna, int chirp, int zero_pad,
                                            Window window) {
  const int n = frame.samples();
  const auto samples = frame.chirp(antenna, chirp);
  std::vector<std::complex<double>> spectrum(static_cast<std::size_t>(n) * std::max(zero_pad, 1));

  double gain = 0.0;
  for (int i = 0; i < n; ++i) {
    // periodic Hann
    const double w = window == Window::hann ? 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / n)) : 1.0;
    spectrum[static_cast<std::size_t>(i)] = samples[static_cast<std::size_t>(i)] * w;
    gain += w;
  }
  fft::forward(spectrum);
  for (auto& v : spectrum) v /= gain;
  return spectrum;
}

RangeDopplerMap doppler_fft(std::span<const std::vector<std::complex<double>>> spectra, const RadarConfig& config,
                            int doppler_zero_pad) {
  if (spectra.size() < 2) throw ConfigError("doppler_fft needs at least two chirps");
  const std::size_t length = spectra.front().size();
  for (const auto& s : spectra) {
    if (s.size() != length) throw ConfigError("doppler_fft: chirp spectra differ in length");
  }
  const int chirps = static_cast<int>(spectra.size());
  const int doppler_bins = chirps * std::max(doppler_zero_pad, 1);
  const int range_bins = static_cast<int>(length / 2);

  const double beat_per_bin = config.sample_rate() / static_cast<double>(length);
  const double range_per_bin = config.range_from_beat(beat_per_bin);
  const double velocity_per_bin = config.velocity_from_phase_step(2.0 * std::numbers::pi / doppler_bins);
  RangeDopplerMap map(doppler_bins, range_bins, range_per_bin, velocity_per_bin);

  std::vector<std::complex<double>> column(static_cast<std::size_t>(doppler_bins));
  for (int r = 0; r < range_bins; ++r) {
    std::fill(column.begin(), column.end(), std::complex<double>{});
    for (int c = 0; c < chirps; ++c) column[static_cast<std::size_t>(c)] = spectra[static_cast<std::size_t>(c)][r];
    fft::forward(column);
    fft::shift(column);
    for (int d = 0; d < doppler_bins; ++d) map.at(d, r) = column[static_cast<std::size_t>(d)] / static_cast<double>(chirps);
  }
  return map;
}

MagnitudeMap magnitude(const RangeDopplerMap& map) {
  MagnitudeMap out{map.doppler_bins(), map.range_bins(), {}};
  out.values.reserve(static_cast<std::size_t>(out.doppler_bins) * out.range_bins);
  for (int d = 0; d < out.doppler_bins; ++d)
    for (int r = 0; r < out.range_bins; ++r) out.values.push_back(std::abs(map.at(d, r)));
  return out;
}

MagnitudeMap noncoherent_sum(const RangeDopplerMap& rx1, const RangeDopplerMap& rx2) {
  if (rx1.doppler_bins() != rx2.doppler_bins() || rx1.range_bins() != rx2.range_bins())
    throw ConfigError("noncoherent_sum: map shapes differ");
  MagnitudeMap out{rx1.doppler_bins(), rx1.range_bins(), {}};
  out.values.reserve(static_cast<std::size_t>(out.doppler_bins) * out.range_bins);
  for (int d = 0; d < out.doppler_bins; ++d)
    for (int r = 0; r < out.range_bins; ++r) out.values.push_back(std::abs(rx1.at(d, r)) + std::abs(rx2.at(d, r)));
  return out;
}

std::vector<Peak> detect_peaks(const MagnitudeMap& map, double threshold, int min_range_bin, int max_range_bin) {
  const int r_lo = std::max(min_range_bin, 0);
  const int r_hi = std::min(max_range_bin, map.range_bins - 1);

  std::map<int, std::vector<Peak>> by_range;
  for (int d = 0; d < map.doppler_bins; ++d) {
    for (int r = r_lo; r <= r_hi; ++r) {
      const double v = map.at(d, r);
      if (!(v > threshold)) continue;
      bool is_peak = true;
      for (int dd = -1; dd <= 1 && is_peak; ++dd) {
        for (int dr = -1; dr <= 1; ++dr) {
          if (dd == 0 && dr == 0) continue;
          const int nd = d + dd;
          const int nr = r + dr;
          if (nd < 0 || nd >= map.doppler_bins || nr < 0 || nr >= map.range_bins) continue;
          const double n = map.at(nd, nr);
          const bool neighbour_earlier = dd < 0 || (dd == 0 && dr < 0);
          if (n > v || (n == v && neighbour_earlier)) {
            is_peak = false;
            break;
          }
        }
      }
      if (is_peak) by_range[r].push_back({r, d, v});
    }
  }

  std::vector<Peak> peaks;
  for (auto& [r, column] : by_range) {
    std::stable_sort(column.begin(), column.end(),
                     [](const Peak& a, const Peak& b) { return a.magnitude > b.magnitude; });
    if (column.size() > 2) column.resize(2);
    std::sort(column.begin(), column.end(), [](const Peak& a, const Peak& b) { return a.doppler_bin < b.doppler_bin; });
    peaks.insert(peaks.end(), column.begin(), column.end());
  }
  return peaks;
}

double bearing_from_phase_difference(double phase_difference, double spacing_wavelengths) {
  const double s = wrap_angle(phase_difference) / (2.0 * std::numbers::pi * spacing_wavelengths);
  return std::asin(std::clamp(s, -1.0, 1.0));
}

double estimate_bearing(const RangeDopplerMap& rx1, const RangeDopplerMap& rx2, const Peak& cell,
                        double spacing_wavelengths) {
  const auto a = rx1.at(cell.doppler_bin, cell.range_bin);
  const auto b = rx2.at(cell.doppler_bin, cell.range_bin);
  return bearing_from_phase_difference(std::arg(b) - std::arg(a), spacing_wavelengths);
}

FrameProducts process_frame_detailed(const RadarConfig& config, const DetectorConfig& detector, const IQFrame& frame) {
  config.validate();
  detector.validate();
  if (!frame.matches(config)) throw ConfigError("process_frame: frame dimensions do not match radar config");

  FrameProducts out;
  std::vector<std::vector<std::complex<double>>> spectra(static_cast<std::size_t>(frame.chirps()));
  for (int a = 0; a < frame.antennas(); ++a) {
    for (int c = 0; c < frame.chirps(); ++c) {
      spectra[static_cast<std::size_t>(c)] = range_fft(frame, a, c, detector.range_zero_pad, detector.range_window);
    }
    out.maps.push_back(doppler_fft(spectra, config, detector.doppler_zero_pad));
  }
  out.combined = noncoherent_sum(out.maps[0], out.maps[1]);

  const RangeDopplerMap& ref = out.maps[0];
  // Every cell overlapping the window; detections are filtered on the interpolated range below.
  const int min_bin = static_cast<int>(std::ceil(config.min_range / ref.range_per_bin() - 0.5));
  const int max_bin = static_cast<int>(std::floor(config.max_range / ref.range_per_bin() + 0.5));
  out.peaks = detect_peaks(out.combined, detector.threshold, min_bin, max_bin);

  const double spacing_wavelengths = config.spacing() / config.wavelength();
  for (const Peak& p : out.peaks) {
    double bin = p.range_bin;
    if (detector.range_interpolation && p.range_bin > 0 && p.range_bin + 1 < out.combined.range_bins) {
      const double left = out.combined.at(p.doppler_bin, p.range_bin - 1);
      const double mid = p.magnitude;
      const double right = out.combined.at(p.doppler_bin, p.range_bin + 1);
      const double denom = left - 2.0 * mid + right;
      if (denom < 0.0) bin += std::clamp(0.5 * (left - right) / denom, -0.5, 0.5);
    }
    Detection det;
    det.range = ref.range_of(bin);
    if (det.range < config.min_range || det.range > config.max_range) continue;
    det.bearing = estimate_bearing(out.maps[0], out.maps[1], p, spacing_wavelengths);
    det.radial_velocity = ref.velocity_of(p.doppler_bin);
    det.magnitude = p.magnitude;
    det.timestamp = frame.timestamp();
    out.detections.push_back(det);
  }
  return out;
}

std::vector<Detection> process_frame(const RadarConfig& config, const DetectorConfig& detector, const IQFrame& frame) {
  return process_frame_detailed(config, detector, frame).detections;
}

}  // namespace radarnav
