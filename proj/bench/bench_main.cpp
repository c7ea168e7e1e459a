// Parallel vs serial Monte Carlo, and recursive vs batch clock updates.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "toa/sim.hpp"
#include "toa/sync.hpp"

using namespace toa;

namespace {

ScenarioConfig mc_config() {
  ScenarioConfig c;
  c.t_max = 60;
  c.trials = 8;
  return c;
}

void BM_MonteCarloSerial(benchmark::State& state) {
  const ScenarioConfig c = mc_config();
  for (auto _ : state) benchmark::DoNotOptimize(run_monte_carlo_serial(c));
}
BENCHMARK(BM_MonteCarloSerial)->Unit(benchmark::kMillisecond);

void BM_MonteCarloParallel(benchmark::State& state) {
  const ScenarioConfig c = mc_config();
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_monte_carlo(c, threads));
}
BENCHMARK(BM_MonteCarloParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

// Blocks of 4 agents over 21 of 25 anchors each.
std::vector<MeasurementBlock> blocks(int count, int m = 25) {
  Rng rng(11);
  std::normal_distribution<double> n01;
  std::vector<int> idx(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) idx[static_cast<std::size_t>(k)] = k;
  std::vector<MeasurementBlock> out;
  for (int t = 0; t < count; ++t) {
    MeasurementBlock b;
    std::vector<Matrix> rows;
    int total = 0;
    for (int a = 0; a < 4; ++a) {
      std::shuffle(idx.begin(), idx.end(), rng);
      const AnchorSet s = AnchorSet::from_unsorted({idx.begin(), idx.begin() + 21}, m);
      rows.push_back(reduced_row_matrix(s, m));
      b.row_sets.push_back(s);
      total += static_cast<int>(rows.back().rows());
    }
    b.a_block.resize(total, m);
    int r0 = 0;
    for (const Matrix& r : rows) {
      b.a_block.middleRows(r0, r.rows()) = r;
      r0 += static_cast<int>(r.rows());
    }
    b.y_block = Vector::NullaryExpr(total, [&] { return n01(rng); });
    out.push_back(std::move(b));
  }
  return out;
}

void BM_BrmpStep(benchmark::State& state) {
  const auto bs = blocks(static_cast<int>(state.range(0)));
  SyncState s = init_sync(25, 0.8);
  for (std::size_t i = 0; i + 1 < bs.size(); ++i) s = brmp_update_full(s, bs[i]);
  for (auto _ : state) benchmark::DoNotOptimize(brmp_update_full(s, bs.back()));
}
BENCHMARK(BM_BrmpStep)->Arg(10)->Arg(100)->Arg(500)->Unit(benchmark::kMicrosecond);

void BM_DirectSolve(benchmark::State& state) {
  const auto bs = blocks(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(direct_lls_solve(bs, 0.8));
}
BENCHMARK(BM_DirectSolve)->Arg(10)->Arg(100)->Arg(500)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
