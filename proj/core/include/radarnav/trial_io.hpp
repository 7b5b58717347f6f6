#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "radarnav/detector.hpp"
#include "radarnav/radar_model.hpp"
#include "radarnav/sim.hpp"

namespace radarnav::io {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest text that parses back to the identical double ("inf", "-inf", "nan" included).
std::string format_double(double value);
double parse_double(const std::string& text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
  const std::string& text(std::size_t row, const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Writes <trial_id>_{truth,detections,tracks,commands}.csv and <trial_id>_summary.json.
void write_trial(const TrialLog& log, const std::filesystem::path& dir);
TrialLog read_trial(const std::filesystem::path& dir, const std::string& trial_id);
std::string summary_json(const TrialLog& log);

/// Batch summary table (one row per trial) plus aggregate JSON.
void write_batch_summary(const std::vector<TrialLog>& logs, double safety_margin, const std::filesystem::path& dir);

/// Binary I/Q dump: one ASCII header line
///   "RADARNAV-IQ antennas=<A> chirps=<M> samples=<N> timestamp=<t>\n"
/// followed by little-endian float32 pairs (I, Q) ordered antenna, chirp, sample.
void write_frame(const IQFrame& frame, const std::filesystem::path& path);
IQFrame read_frame(const std::filesystem::path& path);

/// Magnitudes, one row per Doppler bin, one column per range bin.
void write_magnitude_map(const MagnitudeMap& map, const std::filesystem::path& path);
MagnitudeMap read_magnitude_map(const std::filesystem::path& path);

/// Long format: antenna, chirp, bin, re, im.
void write_range_spectra(const IQFrame& frame, int zero_pad, Window window, const std::filesystem::path& path);

void write_detections(const std::vector<Detection>& detections, const std::filesystem::path& path);
std::vector<Detection> read_detections(const std::filesystem::path& path);

void write_sweep(const SweepResult& sweep, const std::filesystem::path& path);

}  // namespace radarnav::io
