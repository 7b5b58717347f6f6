#include "radarnav/trial_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace radarnav::io {
namespace fs = std::filesystem;
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

std::string fmt(double v) { return format_double(v); }
std::string fmt(long long v) { return std::to_string(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }

long long parse_int(const std::string& s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError("not an integer: '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError("not an unsigned integer: '" + s + "'");
  return v;
}

Outcome parse_outcome(const std::string& s) {
  if (s == "reached_goal") return Outcome::reached_goal;
  if (s == "collision") return Outcome::collision;
  if (s == "timeout") return Outcome::timeout;
  throw FormatError("unknown outcome '" + s + "'");
}

fs::path stream_path(const fs::path& dir, const std::string& trial_id, const std::string& stream) {
  return dir / (trial_id + "_" + stream + ".csv");
}

nlohmann::ordered_json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

std::string format_double(double value) {
  if (value == 0.0) return std::signbit(value) ? "-0" : "0";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw FormatError("format_double failed");
  return {buf, ptr};
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw FormatError("not a number: '" + text + "'");
  return v;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw FormatError("missing CSV column '" + name + "'");
}

double CsvTable::number(std::size_t row, const std::string& name) const { return parse_double(text(row, name)); }

const std::string& CsvTable::text(std::size_t row, const std::string& name) const {
  const auto& r = rows.at(row);
  const std::size_t c = column(name);
  if (c >= r.size()) throw FormatError("short CSV row");
  return r[c];
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in = open_in(path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty CSV");
  table.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split(line);
    if (row.size() != table.header.size()) throw FormatError(path.string() + ": row width differs from header");
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_csv(const fs::path& path, const CsvTable& table) {
  std::ofstream out = open_out(path);
  const auto write_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  };
  write_row(table.header);
  for (const auto& row : table.rows) write_row(row);
}

std::string summary_json(const TrialLog& log) {
  nlohmann::ordered_json j;
  j["trial_id"] = log.trial_id;
  j["outcome"] = to_string(log.outcome);
  j["min_clearance"] = number_or_null(log.min_clearance);
  j["frames"] = log.frames;
  j["seed"] = log.seed;
  auto events = nlohmann::ordered_json::array();
  for (const EventRecord& e : log.events) {
    events.push_back({{"frame", e.frame}, {"time", e.time}, {"kind", e.kind}, {"id", e.id}});
  }
  j["events"] = std::move(events);
  return j.dump(2) + "\n";
}

void write_trial(const TrialLog& log, const fs::path& dir) {
  fs::create_directories(dir);

  CsvTable truth{{"frame", "time", "x", "y", "heading", "vx", "vy", "clearance"}, {}};
  for (const TruthRecord& t : log.truth) {
    truth.rows.push_back({fmt(t.frame), fmt(t.time), fmt(t.position.x()), fmt(t.position.y()), fmt(t.heading),
                          fmt(t.velocity.x()), fmt(t.velocity.y()), fmt(t.clearance)});
  }
  write_csv(stream_path(dir, log.trial_id, "truth"), truth);

  CsvTable detections{{"frame", "time", "index", "range", "bearing", "radial_velocity", "magnitude", "clutter"}, {}};
  for (const DetectionRecord& d : log.detections) {
    detections.rows.push_back({fmt(d.frame), fmt(d.detection.timestamp), fmt(d.index), fmt(d.detection.range),
                               fmt(d.detection.bearing), fmt(d.detection.radial_velocity), fmt(d.detection.magnitude),
                               fmt(d.clutter ? 1 : 0)});
  }
  write_csv(stream_path(dir, log.trial_id, "detections"), detections);

  CsvTable tracks{{"frame", "time", "track_id", "status", "r", "theta", "r_dot", "theta_dot", "trace_p_pos",
                   "assigned_detection_index"},
                  {}};
  for (const TrackRecord& t : log.tracks) {
    tracks.rows.push_back({fmt(t.frame), fmt(t.time), fmt(t.track_id), to_string(t.status), fmt(t.range),
                           fmt(t.bearing), fmt(t.range_rate), fmt(t.bearing_rate), fmt(t.position_score),
                           fmt(t.assigned_detection)});
  }
  write_csv(stream_path(dir, log.trial_id, "tracks"), tracks);

  CsvTable commands{{"frame", "time", "mode", "obstacle_id", "in_cone", "va_x", "va_y", "cmd_x", "cmd_y", "half_angle"},
                    {}};
  for (const CommandRecord& c : log.commands) {
    commands.rows.push_back({fmt(c.frame), fmt(c.time), c.mode, fmt(static_cast<long long>(c.obstacle_id)),
                             fmt(c.in_cone ? 1 : 0), fmt(c.ego_velocity.x()), fmt(c.ego_velocity.y()),
                             fmt(c.command.x()), fmt(c.command.y()), fmt(c.half_angle)});
  }
  write_csv(stream_path(dir, log.trial_id, "commands"), commands);

  std::ofstream summary = open_out(dir / (log.trial_id + "_summary.json"));
  summary << summary_json(log);
}

TrialLog read_trial(const fs::path& dir, const std::string& trial_id) {
  TrialLog log;
  log.trial_id = trial_id;

  std::ifstream summary_in = open_in(dir / (trial_id + "_summary.json"));
  const auto summary = nlohmann::json::parse(summary_in);
  log.outcome = parse_outcome(summary.at("outcome").get<std::string>());
  log.min_clearance = summary.at("min_clearance").is_null() ? std::numeric_limits<double>::infinity()
                                                            : summary.at("min_clearance").get<double>();
  log.frames = summary.at("frames").get<int>();
  log.seed = summary.at("seed").get<std::uint64_t>();
  for (const auto& e : summary.at("events")) {
    log.events.push_back({e.at("frame").get<int>(), e.at("time").get<double>(), e.at("kind").get<std::string>(),
                          e.at("id").get<std::int64_t>()});
  }

  const CsvTable truth = read_csv(stream_path(dir, trial_id, "truth"));
  for (std::size_t i = 0; i < truth.rows.size(); ++i) {
    TruthRecord t;
    t.frame = static_cast<int>(parse_int(truth.text(i, "frame")));
    t.time = truth.number(i, "time");
    t.position = {truth.number(i, "x"), truth.number(i, "y")};
    t.heading = truth.number(i, "heading");
    t.velocity = {truth.number(i, "vx"), truth.number(i, "vy")};
    t.clearance = truth.number(i, "clearance");
    log.truth.push_back(t);
  }

  const CsvTable det = read_csv(stream_path(dir, trial_id, "detections"));
  for (std::size_t i = 0; i < det.rows.size(); ++i) {
    DetectionRecord d;
    d.frame = static_cast<int>(parse_int(det.text(i, "frame")));
    d.index = static_cast<int>(parse_int(det.text(i, "index")));
    d.detection.timestamp = det.number(i, "time");
    d.detection.range = det.number(i, "range");
    d.detection.bearing = det.number(i, "bearing");
    d.detection.radial_velocity = det.number(i, "radial_velocity");
    d.detection.magnitude = det.number(i, "magnitude");
    d.clutter = parse_int(det.text(i, "clutter")) != 0;
    log.detections.push_back(d);
  }

  const CsvTable tracks = read_csv(stream_path(dir, trial_id, "tracks"));
  for (std::size_t i = 0; i < tracks.rows.size(); ++i) {
    TrackRecord t;
    t.frame = static_cast<int>(parse_int(tracks.text(i, "frame")));
    t.time = tracks.number(i, "time");
    t.track_id = parse_u64(tracks.text(i, "track_id"));
    const std::string& status = tracks.text(i, "status");
    if (status != "candidate" && status != "confirmed") throw FormatError("unknown track status '" + status + "'");
    t.status = status == "confirmed" ? TrackStatus::confirmed : TrackStatus::candidate;
    t.range = tracks.number(i, "r");
    t.bearing = tracks.number(i, "theta");
    t.range_rate = tracks.number(i, "r_dot");
    t.bearing_rate = tracks.number(i, "theta_dot");
    t.position_score = tracks.number(i, "trace_p_pos");
    t.assigned_detection = static_cast<int>(parse_int(tracks.text(i, "assigned_detection_index")));
    log.tracks.push_back(t);
  }

  const CsvTable cmds = read_csv(stream_path(dir, trial_id, "commands"));
  for (std::size_t i = 0; i < cmds.rows.size(); ++i) {
    CommandRecord c;
    c.frame = static_cast<int>(parse_int(cmds.text(i, "frame")));
    c.time = cmds.number(i, "time");
    c.mode = cmds.text(i, "mode");
    c.obstacle_id = parse_int(cmds.text(i, "obstacle_id"));
    c.in_cone = parse_int(cmds.text(i, "in_cone")) != 0;
    c.ego_velocity = {cmds.number(i, "va_x"), cmds.number(i, "va_y")};
    c.command = {cmds.number(i, "cmd_x"), cmds.number(i, "cmd_y")};
    c.half_angle = cmds.number(i, "half_angle");
    log.commands.push_back(c);
  }
  return log;
}

void write_batch_summary(const std::vector<TrialLog>& logs, double safety_margin, const fs::path& dir) {
  fs::create_directories(dir);
  CsvTable table{{"trial_id", "outcome", "min_clearance", "frames", "seed"}, {}};
  int reached = 0, collisions = 0, timeouts = 0, margin_respected = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (const TrialLog& log : logs) {
    table.rows.push_back({log.trial_id, to_string(log.outcome), fmt(log.min_clearance), fmt(log.frames), fmt(log.seed)});
    reached += log.outcome == Outcome::reached_goal;
    collisions += log.outcome == Outcome::collision;
    timeouts += log.outcome == Outcome::timeout;
    margin_respected += log.min_clearance >= safety_margin;
    worst = std::min(worst, log.min_clearance);
  }
  write_csv(dir / "batch_summary.csv", table);

  nlohmann::ordered_json j;
  j["trials"] = logs.size();
  j["reached_goal"] = reached;
  j["collision"] = collisions;
  j["timeout"] = timeouts;
  j["safety_margin"] = safety_margin;
  j["margin_respected"] = margin_respected;
  j["min_clearance"] = number_or_null(worst);
  std::ofstream out = open_out(dir / "batch_summary.json");
  out << j.dump(2) << "\n";
}

void write_frame(const IQFrame& frame, const fs::path& path) {
  std::ofstream out = open_out(path, std::ios::binary);
  out << "RADARNAV-IQ antennas=" << frame.antennas() << " chirps=" << frame.chirps() << " samples=" << frame.samples()
      << " timestamp=" << format_double(frame.timestamp()) << "\n";
  const auto put = [&](float f) {
    const auto bits = std::bit_cast<std::uint32_t>(f);
    const char bytes[4] = {static_cast<char>(bits & 0xFF), static_cast<char>((bits >> 8) & 0xFF),
                           static_cast<char>((bits >> 16) & 0xFF), static_cast<char>((bits >> 24) & 0xFF)};
    out.write(bytes, 4);
  };
  for (const auto& v : frame.data()) {
    put(static_cast<float>(v.real()));
    put(static_cast<float>(v.imag()));
  }
  if (!out) throw FormatError("failed writing " + path.string());
}

IQFrame read_frame(const fs::path& path) {
  std::ifstream in = open_in(path, std::ios::binary);
  std::string header;
  if (!std::getline(in, header)) throw FormatError(path.string() + ": missing header");
  std::istringstream hs(header);
  std::string magic;
  hs >> magic;
  if (magic != "RADARNAV-IQ") throw FormatError(path.string() + ": bad magic");
  int antennas = -1, chirps = -1, samples = -1;
  double timestamp = 0.0;
  std::string field;
  while (hs >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw FormatError("bad header field '" + field + "'");
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    if (key == "antennas") antennas = static_cast<int>(parse_int(value));
    else if (key == "chirps") chirps = static_cast<int>(parse_int(value));
    else if (key == "samples") samples = static_cast<int>(parse_int(value));
    else if (key == "timestamp") timestamp = parse_double(value);
    else throw FormatError("unknown header field '" + key + "'");
  }
  if (antennas != IQFrame::kAntennas || chirps <= 0 || samples <= 0) throw FormatError("bad frame dimensions");

  IQFrame frame(chirps, samples, timestamp);
  const auto get = [&]() {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw FormatError(path.string() + ": truncated payload");
    const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    return static_cast<double>(std::bit_cast<float>(bits));
  };
  for (auto& v : frame.data()) {
    const double re = get();
    const double im = get();
    v = {re, im};
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError(path.string() + ": trailing bytes");
  return frame;
}

void write_magnitude_map(const MagnitudeMap& map, const fs::path& path) {
  CsvTable table;
  for (int r = 0; r < map.range_bins; ++r) table.header.push_back("r" + std::to_string(r));
  for (int d = 0; d < map.doppler_bins; ++d) {
    std::vector<std::string> row;
    row.reserve(static_cast<std::size_t>(map.range_bins));
    for (int r = 0; r < map.range_bins; ++r) row.push_back(fmt(map.at(d, r)));
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

MagnitudeMap read_magnitude_map(const fs::path& path) {
  const CsvTable table = read_csv(path);
  MagnitudeMap map{static_cast<int>(table.rows.size()), static_cast<int>(table.header.size()), {}};
  for (const auto& row : table.rows)
    for (const auto& cell : row) map.values.push_back(parse_double(cell));
  return map;
}

void write_range_spectra(const IQFrame& frame, int zero_pad, Window window, const fs::path& path) {
  CsvTable table{{"antenna", "chirp", "bin", "re", "im"}, {}};
  for (int a = 0; a < frame.antennas(); ++a) {
    for (int c = 0; c < frame.chirps(); ++c) {
      const auto spectrum = range_fft(frame, a, c, zero_pad, window);
      for (std::size_t k = 0; k < spectrum.size(); ++k) {
        table.rows.push_back({fmt(a), fmt(c), fmt(static_cast<int>(k)), fmt(spectrum[k].real()), fmt(spectrum[k].imag())});
      }
    }
  }
  write_csv(path, table);
}

void write_detections(const std::vector<Detection>& detections, const fs::path& path) {
  CsvTable table{{"index", "time", "range", "bearing", "radial_velocity", "magnitude"}, {}};
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const Detection& d = detections[i];
    table.rows.push_back({fmt(static_cast<int>(i)), fmt(d.timestamp), fmt(d.range), fmt(d.bearing),
                          fmt(d.radial_velocity), fmt(d.magnitude)});
  }
  write_csv(path, table);
}

std::vector<Detection> read_detections(const fs::path& path) {
  const CsvTable table = read_csv(path);
  std::vector<Detection> out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    Detection d;
    d.timestamp = table.number(i, "time");
    d.range = table.number(i, "range");
    d.bearing = table.number(i, "bearing");
    d.radial_velocity = table.number(i, "radial_velocity");
    d.magnitude = table.number(i, "magnitude");
    out.push_back(d);
  }
  return out;
}

void write_sweep(const SweepResult& sweep, const fs::path& path) {
  CsvTable table{{"bearing_deg", "range_error_m", "bearing_error_deg", "detected", "missed"}, {}};
  for (const SweepRow& row : sweep.rows) {
    table.rows.push_back({fmt(rad2deg(row.bearing)), fmt(row.range_error), fmt(rad2deg(row.bearing_error)),
                          fmt(row.detected), fmt(row.missed)});
  }
  write_csv(path, table);
}

}  // namespace radarnav::io
