#include "radarnav/cli.hpp"

#include <filesystem>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "radarnav/scenario.hpp"
#include "radarnav/trial_io.hpp"

namespace radarnav::cli {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::string scenario;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  int parallel = 1;
  std::string stage;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Scenario load(const Options& opt) {
  if (!fs::is_regular_file(opt.scenario)) throw UsageError("scenario file not found: " + opt.scenario);
  Scenario scenario = load_scenario(opt.scenario);
  if (opt.seed) scenario.world.seed = *opt.seed;
  return scenario;
}

int exit_code(Outcome outcome) {
  switch (outcome) {
    case Outcome::reached_goal: return kOk;
    case Outcome::collision: return kCollision;
    case Outcome::timeout: return kTimeout;
  }
  return kFailure;
}

int cmd_run(const Options& opt, std::ostream& out) {
  const Scenario scenario = load(opt);
  const TrialLog log = run_trial(scenario, "trial");
  fs::create_directories(opt.out);
  io::write_trial(log, opt.out);
  out << io::summary_json(log) << '\n';
  return exit_code(log.outcome);
}

int cmd_batch(const Options& opt, std::ostream& out) {
  const Scenario scenario = load(opt);
  const int trials = opt.trials.value_or(scenario.batch.trials);
  if (trials < 0) throw UsageError("--trials must be >= 0");
  if (opt.parallel < 1) throw UsageError("--parallel must be >= 1");

  const auto scenarios = make_ring_batch(scenario, trials);
  const auto ids = ring_trial_ids(trials);
  const auto logs = run_batch(scenarios, ids, opt.parallel);

  fs::create_directories(opt.out);
  for (const TrialLog& log : logs) io::write_trial(log, opt.out);
  io::write_batch_summary(logs, scenario.avoidance.safety_margin, opt.out);

  int reached = 0;
  for (const TrialLog& log : logs) reached += log.outcome == Outcome::reached_goal;
  out << reached << "/" << logs.size() << " trials reached the goal\n";
  return kOk;
}

int cmd_sweep(const Options& opt, std::ostream& out) {
  const Scenario scenario = load(opt);
  const SweepResult sweep = error_sweep(scenario);
  fs::create_directories(opt.out);
  io::write_sweep(sweep, fs::path(opt.out) / "sweep.csv");

  // Slopes reported per degree of bearing so both series read naturally.
  const double per_deg = deg2rad(1.0);
  nlohmann::ordered_json j;
  j["rows"] = sweep.rows.size();
  j["range_error_slope_m_per_deg"] = sweep.range_fit.slope * per_deg;
  j["range_error_r2"] = sweep.range_fit.r_squared;
  j["bearing_error_slope_deg_per_deg"] = sweep.bearing_fit.slope;
  j["bearing_error_r2"] = sweep.bearing_fit.r_squared;
  out << j.dump(2) << '\n';
  return kOk;
}

int cmd_dump(const Options& opt, std::ostream& out) {
  static const std::vector<std::string> kStages{"frame", "range_fft", "rdmap", "detections"};
  if (std::find(kStages.begin(), kStages.end(), opt.stage) == kStages.end())
    throw UsageError("unknown stage '" + opt.stage + "' (expected frame, range_fft, rdmap or detections)");
  const Scenario scenario = load(opt);

  // The scene as seen from the start pose, without echo perturbation.
  const SimState state = initial_state(scenario);
  const auto echoes = visible_echoes(scenario, state.ego, 0.0);
  const IQFrame frame = synthesize_frame(scenario.radar, echoes, derive_seed(scenario.world.seed, 0), 0.0);

  fs::create_directories(opt.out);
  fs::path path;
  if (opt.stage == "frame") {
    path = fs::path(opt.out) / "frame.iq";
    io::write_frame(frame, path);
  } else if (opt.stage == "range_fft") {
    path = fs::path(opt.out) / "range_fft.csv";
    io::write_range_spectra(frame, scenario.detector.range_zero_pad, scenario.detector.range_window, path);
  } else if (opt.stage == "rdmap") {
    path = fs::path(opt.out) / "rdmap.csv";
    const FrameProducts products = process_frame_detailed(scenario.radar, scenario.detector, frame);
    io::write_magnitude_map(products.combined, path);
  } else {
    path = fs::path(opt.out) / "detections.csv";
    io::write_detections(process_frame(scenario.radar, scenario.detector, frame), path);
  }
  out << path.string() << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"FMCW radar sense-and-avoid simulator", "radarnav"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", opt.scenario, "Scenario JSON file")->required();
    sub->add_option("--out", opt.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", opt.seed, "Override world.seed");
  };
  CLI::App* run_cmd = app.add_subcommand("run", "Run one closed-loop trial");
  add_common(run_cmd);
  CLI::App* batch_cmd = app.add_subcommand("batch", "Run trials from a ring of start poses");
  add_common(batch_cmd);
  batch_cmd->add_option("--trials", opt.trials, "Number of trials (default: batch.trials)");
  batch_cmd->add_option("--parallel", opt.parallel, "Worker threads")->capture_default_str();
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Detection error versus bearing");
  add_common(sweep_cmd);
  CLI::App* dump_cmd = app.add_subcommand("dump", "Write one pipeline stage for the start pose");
  add_common(dump_cmd);
  dump_cmd->add_option("--stage", opt.stage, "frame | range_fft | rdmap | detections")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(opt, out);
    if (batch_cmd->parsed()) return cmd_batch(opt, out);
    if (sweep_cmd->parsed()) return cmd_sweep(opt, out);
    return cmd_dump(opt, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ScenarioError& e) {
    err << "invalid scenario: " << e.what() << '\n';
    return kBadScenario;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace radarnav::cli
