#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "fbsim/biphoton.hpp"
#include "fbsim/config.hpp"
#include "fbsim/experiment.hpp"
#include "fbsim/pdpm.hpp"

namespace {

using namespace fbsim;

FrequencyLattice wide(int half) { return FrequencyLattice(193.4e12, 18e9, -half, half); }

void BM_PhaseModulator(benchmark::State& state) {
  const auto lat = wide(static_cast<int>(state.range(0)));
  ModulatorParams p;
  p.mod_index_slow = 1.5;
  p.pol_extinction = 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(phase_modulator(p, lat));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PhaseModulator)->RangeMultiplier(4)->Range(16, 1024);

void BM_ApplyBoth(benchmark::State& state) {
  const auto lat = wide(60);
  ModulatorParams p;
  p.mod_index_slow = 1.0;
  const auto pm = phase_modulator(p, lat);
  const auto st = make_bfc(lat, {PairSpec{5, -5}, PairSpec{3, -3}}, true);
  for (auto _ : state) benchmark::DoNotOptimize(apply_both(pm, st));
}
BENCHMARK(BM_ApplyBoth);

void BM_PdpmBuild(benchmark::State& state) {
  const auto lat = wide(139);
  PdpmParams d;
  d.mod1.mod_index_slow = d.mod2.mod_index_slow = 1.0;
  d.arm_delay_diff = 2e-12;
  for (auto _ : state) benchmark::DoNotOptimize(build_pdpm(d, lat));
}
BENCHMARK(BM_PdpmBuild);

void BM_DelayEstimate(benchmark::State& state) {
  const auto lat = wide(139);
  std::vector<double> power;
  for (int k = lat.min_index(); k <= lat.max_index(); ++k) {
    power.push_back(1.0 + std::cos(2.0 * std::numbers::pi * lat.frequency(k) * 1.3e-12));
  }
  for (auto _ : state) benchmark::DoNotOptimize(estimate_delay_from_power(lat, power));
}
BENCHMARK(BM_DelayEstimate);

void BM_Calibrate(benchmark::State& state) {
  PdpmParams d;
  d.arm1_loss_db = 2.7;
  d.arm2_loss_db = 3.7;
  d.mod1.mod_index_slow = 1.0;
  d.mod2.mod_index_slow = 1.0;
  d.mod1.v_pi = 4.0;
  d.mod2.v_pi = 4.6;
  d.mod1.drive_voltage = d.mod2.drive_voltage = 1.2;
  d.arm_delay_diff = 3e-12;
  d.rf_phase_diff = 0.4;
  for (auto _ : state) benchmark::DoNotOptimize(calibrate_pdpm(d));
}
BENCHMARK(BM_Calibrate)->Unit(benchmark::kMillisecond);

void BM_FringeScan(benchmark::State& state) {
  const auto cfg = load_config(FBSIM_CONFIG_DIR "/fringe_pdpm_split.cfg");
  for (auto _ : state) benchmark::DoNotOptimize(run_fringe_scan(cfg));
}
BENCHMARK(BM_FringeScan)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
