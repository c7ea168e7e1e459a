#include "toa/sim.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include <omp.h>

#include "toa/errors.hpp"

namespace toa {

void ScenarioConfig::validate() const {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m))));
  if (m < 4 || side * side != m) throw InvalidInput("m must be a perfect square >= 4");
  if (n_agents < 1) throw InvalidInput("n_agents must be >= 1");
  if (!(area_side > 0.0)) throw InvalidInput("area_side must be positive");
  if (!(sigma >= 0.0)) throw InvalidInput("sigma must be >= 0");
  if (!(nlos_fraction >= 0.0 && nlos_fraction < 0.5)) {
    throw InvalidInput("nlos_fraction must lie in [0, 0.5)");
  }
  if (!(nlos_range.first <= nlos_range.second) || !(offset_range.first <= offset_range.second) ||
      !(tx_time_range.first <= tx_time_range.second)) {
    throw InvalidInput("ranges must satisfy lo <= hi");
  }
  if (nlos_fraction > 0.0 && !(nlos_range.first > 0.0)) {
    throw InvalidInput("NLoS errors must be positive");
  }
  if (!(lambda > 0.0 && lambda <= 1.0)) throw InvalidInput("lambda must lie in (0, 1]");
  if (!(alpha > 0.5 && alpha <= 1.0)) throw InvalidInput("alpha must lie in (0.5, 1]");
  if (t_max < 1) throw InvalidInput("t_max must be >= 1");
  if (trials < 1) throw InvalidInput("trials must be >= 1");
  engine_config().loc.validate();
}

EngineConfig ScenarioConfig::engine_config() const {
  EngineConfig e;
  e.lambda = lambda;
  e.selection = selection_mode;
  e.loc.alpha = alpha;
  e.loc.k_max = k_max;
  e.loc.k_ne = k_ne;
  e.loc.grad_tol = grad_tol;
  e.loc.agent_height = agent_height;
  e.loc.fix_height = fix_height;
  e.loc.centering = centering;
  e.loc.init_strategy = init_strategy;
  return e;
}

std::string to_string(SelectionMode mode) {
  switch (mode) {
    case SelectionMode::Rlsr: return "rlsr";
    case SelectionMode::All: return "all";
    case SelectionMode::Oracle: return "oracle";
  }
  return "?";
}

SelectionMode selection_mode_from_string(const std::string& s) {
  if (s == "rlsr") return SelectionMode::Rlsr;
  if (s == "all") return SelectionMode::All;
  if (s == "oracle") return SelectionMode::Oracle;
  throw InvalidInput("unknown selection mode '" + s + "' (expected rlsr, all or oracle)");
}

NetworkGeometry build_geometry(const ScenarioConfig& cfg) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(cfg.m))));
  if (cfg.m < 4 || side * side != cfg.m) {
    throw InvalidInput("build_geometry: m = " + std::to_string(cfg.m) +
                       " is not a perfect square >= 4");
  }
  NetworkGeometry g;
  g.dim = 3;
  g.anchors.resize(3, cfg.m);
  const double spacing = cfg.area_side / (side - 1);
  int k = 0;
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j, ++k) {
      g.anchors.col(k) << spacing * i, spacing * j, cfg.anchor_height;
    }
  }
  g.validate();
  return g;
}

std::uint64_t trial_seed(std::uint64_t seed, int k) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(k) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double position_rmse(const std::vector<Vector>& est, const std::vector<Vector>& truth) {
  if (est.size() != truth.size() || est.empty()) {
    throw InvalidInput("position_rmse: size mismatch");
  }
  double sum = 0.0;
  for (std::size_t n = 0; n < est.size(); ++n) sum += (est[n] - truth[n]).squaredNorm();
  return std::sqrt(sum / static_cast<double>(est.size()));
}

double aligned_clock_rmse(const Vector& est, const Vector& truth) {
  if (est.size() != truth.size() || est.size() == 0) {
    throw InvalidInput("aligned_clock_rmse: size mismatch");
  }
  Vector err = est - truth;
  err.array() -= err.mean();
  return std::sqrt(err.squaredNorm() / static_cast<double>(err.size()));
}

namespace {

struct NlosTally {
  double sum = 0.0;
  double cells = 0.0;

  void add(const AnchorSet& selected, const AnchorSet& true_nlos) {
    if (true_nlos.empty()) return;
    int hit = 0;
    for (int idx : true_nlos) hit += selected.contains(idx) ? 0 : 1;
    sum += static_cast<double>(hit) / true_nlos.size();
    cells += 1.0;
  }
  double value() const {
    return cells > 0.0 ? sum / cells : std::numeric_limits<double>::quiet_NaN();
  }
};

}  // namespace

double nlos_accuracy(const std::vector<AnchorSet>& selected,
                     const std::vector<AnchorSet>& true_nlos) {
  if (selected.size() != true_nlos.size()) throw InvalidInput("nlos_accuracy: traces not aligned");
  NlosTally tally;
  for (std::size_t i = 0; i < selected.size(); ++i) tally.add(selected[i], true_nlos[i]);
  return tally.value();
}

namespace {

// Draws per-frame truth. Order of draws: per agent x, y, tx time, NLoS
// subset (partial Fisher-Yates), NLoS magnitudes in subset order.
std::vector<AgentTruth> draw_agents(const ScenarioConfig& cfg, const NetworkGeometry& geom,
                                    int nlos_count, Rng& rng) {
  std::uniform_real_distribution<double> coord(0.0, cfg.area_side);
  std::uniform_real_distribution<double> tx(cfg.tx_time_range.first, cfg.tx_time_range.second);
  std::uniform_real_distribution<double> bias(cfg.nlos_range.first, cfg.nlos_range.second);
  const int m = geom.anchor_count();

  std::vector<AgentTruth> agents(static_cast<std::size_t>(cfg.n_agents));
  std::vector<int> perm(static_cast<std::size_t>(m));
  for (auto& a : agents) {
    a.position.resize(3);
    a.position(0) = coord(rng);
    a.position(1) = coord(rng);
    a.position(2) = cfg.agent_height;
    a.tx_time = tx(rng);

    std::iota(perm.begin(), perm.end(), 0);
    for (int i = 0; i < nlos_count; ++i) {
      std::uniform_int_distribution<int> pick(i, m - 1);
      std::swap(perm[static_cast<std::size_t>(i)],
                perm[static_cast<std::size_t>(pick(rng))]);
    }
    a.nlos_errors = Vector::Zero(m);
    std::vector<int> nlos(perm.begin(), perm.begin() + nlos_count);
    for (int idx : nlos) a.nlos_errors(idx) = bias(rng);
    a.los_set = AnchorSet::from_unsorted(std::vector<int>(perm.begin() + nlos_count, perm.end()), m);
  }
  return agents;
}

}  // namespace

TrialResult run_trial(const ScenarioConfig& cfg, std::uint64_t seed, bool keep_trace,
                      SyncMethod sync_method) {
  cfg.validate();
  const NetworkGeometry geom = build_geometry(cfg);
  const int m = geom.anchor_count();
  const int nlos_count = ceil_count(cfg.nlos_fraction, m);

  Rng rng(seed);
  std::uniform_real_distribution<double> off(cfg.offset_range.first, cfg.offset_range.second);
  Vector offsets(m);
  for (int k = 0; k < m; ++k) offsets(k) = off(rng);

  EngineConfig ecfg = cfg.engine_config();
  ecfg.sync_method = sync_method;
  Engine engine(geom, ecfg, cfg.n_agents);

  TrialResult out;
  MetricsSeries& ms = out.metrics;
  const auto steps = static_cast<std::size_t>(cfg.t_max);
  ms.clock_rmse.reserve(steps);
  ms.pos_rmse.reserve(steps);
  ms.full_branch.reserve(steps);
  ms.step_seconds.reserve(steps);
  ms.sync_seconds.reserve(steps);
  if (keep_trace) {
    out.trace.true_offsets = offsets;
    out.trace.covered.push_back(engine.state().sync.covered_set);
  }

  NlosTally tally;
  for (int t = 1; t <= cfg.t_max; ++t) {
    const std::vector<AgentTruth> agents = draw_agents(cfg, geom, nlos_count, rng);
    const ToaFrame frame = generate_frame(geom, agents, offsets, cfg.sigma, rng, t);

    const auto start = std::chrono::steady_clock::now();
    const StepResult step = engine.step(frame);
    const auto stop = std::chrono::steady_clock::now();

    std::vector<Vector> est;
    std::vector<Vector> truth;
    std::vector<AnchorSet> sel;
    std::vector<AnchorSet> nlos;
    for (int n = 0; n < cfg.n_agents; ++n) {
      const auto& a = agents[static_cast<std::size_t>(n)];
      const auto& r = step.agents[static_cast<std::size_t>(n)];
      est.push_back(r.position);
      truth.push_back(a.position);
      sel.push_back(r.selected_set);
      nlos.push_back(a.los_set.complement(m));
      tally.add(sel.back(), nlos.back());
    }

    ms.clock_rmse.push_back(aligned_clock_rmse(engine.delta_hat(), offsets));
    ms.pos_rmse.push_back(position_rmse(est, truth));
    ms.full_branch.push_back(step.reduced_branch ? 0.0 : 1.0);
    ms.step_seconds.push_back(std::chrono::duration<double>(stop - start).count());
    ms.sync_seconds.push_back(step.sync_seconds);
    (step.reduced_branch ? ms.reduced_branch_count : ms.full_branch_count) += 1;
    ms.covered_growth += step.covered_grew ? 1 : 0;
    ms.failed_agent_restarts += step.failed_agents;

    if (keep_trace) {
      out.trace.selected.push_back(std::move(sel));
      out.trace.true_nlos.push_back(std::move(nlos));
      out.trace.est_positions.push_back(std::move(est));
      out.trace.true_positions.push_back(std::move(truth));
      out.trace.delta_hat.push_back(engine.delta_hat());
      out.trace.covered.push_back(engine.state().sync.covered_set);
    }
  }
  ms.nlos_accuracy = tally.value();
  ms.nlos_cells = tally.cells;
  return out;
}

MetricsSeries aggregate(const std::vector<MetricsSeries>& trials) {
  if (trials.empty()) throw InvalidInput("aggregate: no trials");
  const std::size_t len = trials.front().pos_rmse.size();
  MetricsSeries agg;
  agg.clock_rmse.assign(len, 0.0);
  agg.pos_rmse.assign(len, 0.0);
  agg.full_branch.assign(len, 0.0);
  agg.step_seconds.assign(len, 0.0);
  agg.sync_seconds.assign(len, 0.0);
  double nlos_sum = 0.0;
  for (const auto& tr : trials) {
    if (tr.pos_rmse.size() != len) throw InvalidInput("aggregate: series length mismatch");
    for (std::size_t i = 0; i < len; ++i) {
      agg.clock_rmse[i] += tr.clock_rmse[i];
      agg.pos_rmse[i] += tr.pos_rmse[i];
      agg.full_branch[i] += tr.full_branch[i];
      agg.step_seconds[i] += tr.step_seconds[i];
      if (tr.sync_seconds.size() == len) agg.sync_seconds[i] += tr.sync_seconds[i];
    }
    if (tr.nlos_cells > 0.0) {
      nlos_sum += tr.nlos_accuracy * tr.nlos_cells;
      agg.nlos_cells += tr.nlos_cells;
    }
    agg.full_branch_count += tr.full_branch_count;
    agg.reduced_branch_count += tr.reduced_branch_count;
    agg.covered_growth = std::max(agg.covered_growth, tr.covered_growth);
    agg.failed_agent_restarts += tr.failed_agent_restarts;
  }
  const double inv = 1.0 / static_cast<double>(trials.size());
  for (std::size_t i = 0; i < len; ++i) {
    agg.clock_rmse[i] *= inv;
    agg.pos_rmse[i] *= inv;
    agg.full_branch[i] *= inv;
    agg.step_seconds[i] *= inv;
    agg.sync_seconds[i] *= inv;
  }
  agg.nlos_accuracy = agg.nlos_cells > 0.0 ? nlos_sum / agg.nlos_cells
                                           : std::numeric_limits<double>::quiet_NaN();
  return agg;
}

MetricsSeries run_monte_carlo(const ScenarioConfig& cfg, int threads) {
  cfg.validate();
  std::vector<MetricsSeries> per_trial(static_cast<std::size_t>(cfg.trials));
  const int n_threads = threads > 0 ? threads : omp_get_max_threads();

  // Exceptions must not escape an OpenMP region; keep the first one.
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1) num_threads(n_threads)
  for (int k = 0; k < cfg.trials; ++k) {
    try {
      per_trial[static_cast<std::size_t>(k)] = run_trial(cfg, trial_seed(cfg.seed, k)).metrics;
    } catch (...) {
#pragma omp critical(toa_mc_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return aggregate(per_trial);
}

MetricsSeries run_monte_carlo_serial(const ScenarioConfig& cfg) {
  cfg.validate();
  std::vector<MetricsSeries> per_trial;
  per_trial.reserve(static_cast<std::size_t>(cfg.trials));
  for (int k = 0; k < cfg.trials; ++k) {
    per_trial.push_back(run_trial(cfg, trial_seed(cfg.seed, k)).metrics);
  }
  return aggregate(per_trial);
}

RuntimeSeries runtime_comparison(const ScenarioConfig& cfg) {
  cfg.validate();
  // Direct re-solve keeps every block: t_max * N * M rows of M doubles.
  const double elements = static_cast<double>(cfg.t_max) * cfg.n_agents * cfg.m * cfg.m;
  if (elements > 2.5e8) {
    throw RangeError("runtime_comparison: direct re-solve would store " +
                     std::to_string(elements) + " matrix entries");
  }
  RuntimeSeries out;
  out.brmp_seconds.assign(static_cast<std::size_t>(cfg.t_max), 0.0);
  out.direct_seconds.assign(static_cast<std::size_t>(cfg.t_max), 0.0);
  out.brmp_sync_seconds.assign(static_cast<std::size_t>(cfg.t_max), 0.0);
  out.direct_sync_seconds.assign(static_cast<std::size_t>(cfg.t_max), 0.0);
  for (int k = 0; k < cfg.trials; ++k) {
    const std::uint64_t seed = trial_seed(cfg.seed, k);
    const TrialResult brmp = run_trial(cfg, seed, true, SyncMethod::Brmp);
    const TrialResult direct = run_trial(cfg, seed, true, SyncMethod::Direct);
    for (std::size_t i = 0; i < out.brmp_seconds.size(); ++i) {
      out.brmp_seconds[i] += brmp.metrics.step_seconds[i] / cfg.trials;
      out.direct_seconds[i] += direct.metrics.step_seconds[i] / cfg.trials;
      out.brmp_sync_seconds[i] += brmp.metrics.sync_seconds[i] / cfg.trials;
      out.direct_sync_seconds[i] += direct.metrics.sync_seconds[i] / cfg.trials;
      for (std::size_t n = 0; n < brmp.trace.est_positions[i].size(); ++n) {
        out.max_position_gap =
            std::max(out.max_position_gap,
                     (brmp.trace.est_positions[i][n] - direct.trace.est_positions[i][n]).norm());
      }
    }
  }
  return out;
}

double regression_slope(const std::vector<double>& ys) {
  const auto n = static_cast<double>(ys.size());
  if (ys.size() < 2) return 0.0;
  const double x_mean = (n + 1.0) / 2.0;
  const double y_mean = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double dx = static_cast<double>(i + 1) - x_mean;
    sxy += dx * (ys[i] - y_mean);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

double mean_over(const std::vector<double>& xs, int from_t, int to_t) {
  double sum = 0.0;
  int count = 0;
  for (int t = from_t; t <= to_t && t <= static_cast<int>(xs.size()); ++t) {
    sum += xs[static_cast<std::size_t>(t - 1)];
    ++count;
  }
  return count ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace toa
