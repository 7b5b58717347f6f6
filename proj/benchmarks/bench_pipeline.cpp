#include <benchmark/benchmark.h>

#include <random>

#include "radarnav/assignment.hpp"
#include "radarnav/detector.hpp"
#include "radarnav/scenario.hpp"
#include "radarnav/sim.hpp"
#include "radarnav/tracker.hpp"

using namespace radarnav;

namespace {

void BM_SynthesizeFrame(benchmark::State& state) {
  const RadarConfig cfg;
  const std::vector<TargetEcho> echoes{{4.0, 0.1, -0.8, 1.0}, {7.5, -0.3, 0.0, 0.7}};
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(synthesize_frame(cfg, echoes, ++seed));
}
BENCHMARK(BM_SynthesizeFrame);

void BM_ProcessFrame(benchmark::State& state) {
  const RadarConfig cfg;
  const DetectorConfig det;
  const std::vector<TargetEcho> echoes{{4.0, 0.1, -0.8, 1.0}, {7.5, -0.3, 0.0, 0.7}};
  const IQFrame frame = synthesize_frame(cfg, echoes, 1);
  for (auto _ : state) benchmark::DoNotOptimize(process_frame(cfg, det, frame));
}
BENCHMARK(BM_ProcessFrame);

void BM_LinearAssignment(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  Eigen::MatrixXd cost(n, 2 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 2 * n; ++j) cost(i, j) = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(solve_linear_assignment(cost));
}
BENCHMARK(BM_LinearAssignment)->Arg(4)->Arg(16)->Arg(64);

void BM_TrackerStep(benchmark::State& state) {
  const auto targets = static_cast<int>(state.range(0));
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<Measurement> z(static_cast<std::size_t>(targets));
  Tracker tracker;
  double t = 0.0;
  for (auto _ : state) {
    t += 0.1;
    for (int i = 0; i < targets; ++i)
      z[static_cast<std::size_t>(i)] = {{2.0 + i + noise(rng), -0.5 + 0.1 * i + noise(rng), noise(rng)}, t};
    benchmark::DoNotOptimize(tracker.step(z, 0.1));
  }
}
BENCHMARK(BM_TrackerStep)->Arg(1)->Arg(4)->Arg(8);

void BM_RunTrial(benchmark::State& state) {
  const Scenario scenario = load_scenario(RADARNAV_SCENARIO_DIR "/one_pole.json");
  for (auto _ : state) benchmark::DoNotOptimize(run_trial(scenario));
  state.SetLabel("one_pole");
}
BENCHMARK(BM_RunTrial)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
