#include <doctest.h>

#include <fstream>
#include <limits>
#include <random>

#include <json.hpp>

#include "radarnav/scenario.hpp"
#include "radarnav/trial_io.hpp"
#include "support.hpp"

using namespace radarnav;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

IQFrame random_frame(std::uint64_t seed) {
  RadarConfig cfg = testing::noise_free_radar();
  cfg.noise.iq_noise_std = 0.3;
  const std::vector<TargetEcho> echoes{{5.0, 0.2, -0.5, 1.0}};
  return synthesize_frame(cfg, echoes, seed, 1.7);
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("doubles round trip exactly through text") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 2000; ++i) {
      const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
      CHECK(io::parse_double(io::format_double(x)) == x);
    }
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(io::parse_double(io::format_double(inf)) == inf);
    CHECK(io::parse_double(io::format_double(-inf)) == -inf);
    CHECK(std::isnan(io::parse_double(io::format_double(std::nan("")))));
    CHECK(io::format_double(0.1) == "0.1");
    CHECK_THROWS_AS(io::parse_double("1.0x"), io::FormatError);
    CHECK_THROWS_AS(io::parse_double(""), io::FormatError);
  }

  TEST_CASE("csv tables round trip") {
    const fs::path dir = testing::scratch_dir("io_csv");
    const io::CsvTable table{{"a", "b"}, {{"1", "x"}, {"2.5", "y"}}};
    io::write_csv(dir / "t.csv", table);
    const io::CsvTable back = io::read_csv(dir / "t.csv");
    CHECK(back.header == table.header);
    CHECK(back.rows == table.rows);
    CHECK(back.number(1, "a") == 2.5);
    CHECK(back.text(0, "b") == "x");
    CHECK_THROWS_AS(back.column("c"), io::FormatError);

    write_text(dir / "ragged.csv", "a,b\n1\n");
    CHECK_THROWS_AS(io::read_csv(dir / "ragged.csv"), io::FormatError);
    CHECK_THROWS_AS(io::read_csv(dir / "missing.csv"), io::FormatError);
    fs::remove_all(dir);
  }

  TEST_CASE("iq frame dump: header, layout and round trip") {
    const fs::path dir = testing::scratch_dir("io_frame");
    const IQFrame frame = random_frame(4);
    io::write_frame(frame, dir / "f.iq");

    const std::string bytes = testing::slurp(dir / "f.iq");
    const auto newline = bytes.find('\n');
    REQUIRE(newline != std::string::npos);
    CHECK(bytes.substr(0, newline) == "RADARNAV-IQ antennas=2 chirps=" + std::to_string(frame.chirps()) +
                                          " samples=" + std::to_string(frame.samples()) + " timestamp=1.7");
    CHECK(bytes.size() == newline + 1 + frame.data().size() * 8);

    // first float is I of antenna 0, chirp 0, sample 0, little-endian
    std::uint32_t bits = 0;
    for (int k = 0; k < 4; ++k)
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[newline + 1 + k])) << (8 * k);
    CHECK(std::bit_cast<float>(bits) == static_cast<float>(frame.at(0, 0, 0).real()));

    const IQFrame back = io::read_frame(dir / "f.iq");
    CHECK(back.chirps() == frame.chirps());
    CHECK(back.samples() == frame.samples());
    CHECK(back.timestamp() == frame.timestamp());
    bool exact = true;
    for (std::size_t i = 0; i < frame.data().size(); ++i) {
      const auto& a = frame.data()[i];
      const auto& b = back.data()[i];
      exact &= b.real() == static_cast<float>(a.real()) && b.imag() == static_cast<float>(a.imag());
    }
    CHECK(exact);

    io::write_frame(back, dir / "g.iq");
    CHECK(testing::slurp(dir / "g.iq") == bytes);
    fs::remove_all(dir);
  }

  TEST_CASE("malformed frame dumps are rejected") {
    const fs::path dir = testing::scratch_dir("io_bad_frame");
    io::write_frame(random_frame(5), dir / "f.iq");
    const std::string bytes = testing::slurp(dir / "f.iq");

    write_text(dir / "magic.iq", "X" + bytes.substr(1));
    CHECK_THROWS_AS(io::read_frame(dir / "magic.iq"), io::FormatError);
    write_text(dir / "short.iq", bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(io::read_frame(dir / "short.iq"), io::FormatError);
    write_text(dir / "long.iq", bytes + "xx");
    CHECK_THROWS_AS(io::read_frame(dir / "long.iq"), io::FormatError);
    write_text(dir / "dims.iq", "RADARNAV-IQ antennas=3 chirps=1 samples=1 timestamp=0\n");
    CHECK_THROWS_AS(io::read_frame(dir / "dims.iq"), io::FormatError);
    fs::remove_all(dir);
  }

  TEST_CASE("magnitude map and detections round trip value-exact") {
    const fs::path dir = testing::scratch_dir("io_map");
    const RadarConfig cfg = testing::noise_free_radar();
    const DetectorConfig det;
    const FrameProducts products = process_frame_detailed(cfg, det, random_frame(6));

    io::write_magnitude_map(products.combined, dir / "m.csv");
    const MagnitudeMap map = io::read_magnitude_map(dir / "m.csv");
    CHECK(map.doppler_bins == products.combined.doppler_bins);
    CHECK(map.range_bins == products.combined.range_bins);
    CHECK(map.values == products.combined.values);

    REQUIRE_FALSE(products.detections.empty());
    io::write_detections(products.detections, dir / "d.csv");
    const auto back = io::read_detections(dir / "d.csv");
    REQUIRE(back.size() == products.detections.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      CHECK(back[i].range == products.detections[i].range);
      CHECK(back[i].bearing == products.detections[i].bearing);
      CHECK(back[i].radial_velocity == products.detections[i].radial_velocity);
      CHECK(back[i].magnitude == products.detections[i].magnitude);
      CHECK(back[i].timestamp == products.detections[i].timestamp);
    }
    fs::remove_all(dir);
  }

  TEST_CASE("range spectra are written in long format") {
    const fs::path dir = testing::scratch_dir("io_spectra");
    const IQFrame frame = random_frame(7);
    io::write_range_spectra(frame, 4, Window::hann, dir / "r.csv");
    const io::CsvTable table = io::read_csv(dir / "r.csv");
    CHECK(table.header == std::vector<std::string>{"antenna", "chirp", "bin", "re", "im"});
    REQUIRE(table.rows.size() == static_cast<std::size_t>(2 * frame.chirps() * frame.samples() * 4));
    const auto spectrum = range_fft(frame, 1, 3, 4, Window::hann);
    const std::size_t row = static_cast<std::size_t>((frame.chirps() + 3) * frame.samples() * 4 + 17);
    CHECK(table.number(row, "antenna") == 1);
    CHECK(table.number(row, "chirp") == 3);
    CHECK(table.number(row, "bin") == 17);
    CHECK(table.number(row, "re") == spectrum[17].real());
    CHECK(table.number(row, "im") == spectrum[17].imag());
    fs::remove_all(dir);
  }

  TEST_CASE("trial logs round trip through the written files") {
    const fs::path dir = testing::scratch_dir("io_trial");
    const Scenario s = load_scenario(testing::kScenarioDir / "one_pole.json");
    const TrialLog log = run_trial(s, "t7");
    io::write_trial(log, dir);
    for (const char* stream : {"truth", "detections", "tracks", "commands"})
      CHECK(fs::is_regular_file(dir / ("t7_" + std::string(stream) + ".csv")));
    CHECK(fs::is_regular_file(dir / "t7_summary.json"));

    const TrialLog back = io::read_trial(dir, "t7");
    CHECK(back.trial_id == log.trial_id);
    CHECK(back.seed == log.seed);
    CHECK(back.outcome == log.outcome);
    CHECK(back.min_clearance == log.min_clearance);
    CHECK(back.frames == log.frames);
    REQUIRE(back.truth.size() == log.truth.size());
    for (std::size_t i = 0; i < log.truth.size(); ++i) {
      CHECK(back.truth[i].position == log.truth[i].position);
      CHECK(back.truth[i].velocity == log.truth[i].velocity);
      CHECK(back.truth[i].clearance == log.truth[i].clearance);
    }
    REQUIRE(back.detections.size() == log.detections.size());
    for (std::size_t i = 0; i < log.detections.size(); ++i) {
      CHECK(back.detections[i].detection.range == log.detections[i].detection.range);
      CHECK(back.detections[i].clutter == log.detections[i].clutter);
    }
    REQUIRE(back.tracks.size() == log.tracks.size());
    for (std::size_t i = 0; i < log.tracks.size(); ++i) {
      CHECK(back.tracks[i].track_id == log.tracks[i].track_id);
      CHECK(back.tracks[i].status == log.tracks[i].status);
      CHECK(back.tracks[i].position_score == log.tracks[i].position_score);
      CHECK(back.tracks[i].assigned_detection == log.tracks[i].assigned_detection);
    }
    REQUIRE(back.commands.size() == log.commands.size());
    for (std::size_t i = 0; i < log.commands.size(); ++i) {
      CHECK(back.commands[i].mode == log.commands[i].mode);
      CHECK(back.commands[i].command == log.commands[i].command);
    }
    CHECK(back.events.size() == log.events.size());

    // rewriting what was read reproduces the files byte for byte
    const fs::path again = testing::scratch_dir("io_trial_again");
    io::write_trial(back, again);
    CHECK(testing::snapshot(again) == testing::snapshot(dir));
    fs::remove_all(dir);
    fs::remove_all(again);
  }

  TEST_CASE("batch summary aggregates outcomes") {
    const fs::path dir = testing::scratch_dir("io_batch");
    TrialLog a, b;
    a.trial_id = "trial_000";
    a.outcome = Outcome::reached_goal;
    a.min_clearance = 0.5;
    b.trial_id = "trial_001";
    b.outcome = Outcome::collision;
    b.min_clearance = -0.1;
    io::write_batch_summary({a, b}, 0.2, dir);
    const io::CsvTable table = io::read_csv(dir / "batch_summary.csv");
    REQUIRE(table.rows.size() == 2);
    CHECK(table.text(1, "outcome") == "collision");
    const auto j = nlohmann::json::parse(testing::slurp(dir / "batch_summary.json"));
    CHECK(j.at("reached_goal") == 1);
    CHECK(j.at("collision") == 1);
    CHECK(j.at("margin_respected") == 1);
    CHECK(j.at("min_clearance") == -0.1);

    io::write_batch_summary({}, 0.2, dir);
    CHECK(io::read_csv(dir / "batch_summary.csv").rows.empty());
    CHECK(nlohmann::json::parse(testing::slurp(dir / "batch_summary.json")).at("min_clearance").is_null());
    fs::remove_all(dir);
  }

  TEST_CASE("sweep table reports degrees") {
    const fs::path dir = testing::scratch_dir("io_sweep");
    SweepResult sweep;
    sweep.rows = {{deg2rad(10.0), 0.1, deg2rad(2.0), 9, 1}};
    io::write_sweep(sweep, dir / "s.csv");
    const io::CsvTable table = io::read_csv(dir / "s.csv");
    CHECK(table.number(0, "bearing_deg") == doctest::Approx(10.0));
    CHECK(table.number(0, "bearing_error_deg") == doctest::Approx(2.0));
    CHECK(table.number(0, "missed") == 1);
    fs::remove_all(dir);
  }
}
