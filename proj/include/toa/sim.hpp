#pragma once

// Monte-Carlo scenario harness: square-grid anchors, agents dropped uniformly
// at random every time instance, a fixed share of NLoS-biased links per
// agent, and per-time-instance error metrics.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "toa/engine.hpp"

namespace toa {

struct ScenarioConfig {
  int m = 25;
  int n_agents = 4;
  double area_side = 32.0;       // m
  double anchor_height = 5.0;    // m
  double agent_height = 1.5;     // m
  double sigma = 0.4;            // ns
  double nlos_fraction = 0.12;
  std::pair<double, double> nlos_range{10.0, 40.0};     // ns
  std::pair<double, double> offset_range{-8.0, 8.0};    // ns
  std::pair<double, double> tx_time_range{0.0, 100.0};  // ns
  double lambda = 0.8;
  double alpha = 0.88;
  int t_max = 500;
  int trials = 50;
  std::uint64_t seed = 20250101;
  SelectionMode selection_mode = SelectionMode::Rlsr;
  // Localiser knobs.
  int k_max = 20;
  int k_ne = 50;
  double grad_tol = 1e-9;
  bool fix_height = true;
  ResidualCentering centering = ResidualCentering::FittedSet;
  InitStrategy init_strategy = InitStrategy::AnchorCentroid;

  void validate() const;
  EngineConfig engine_config() const;
};

std::string to_string(SelectionMode mode);
SelectionMode selection_mode_from_string(const std::string& s);

NetworkGeometry build_geometry(const ScenarioConfig& cfg);

// splitmix64 finaliser applied to seed + (k + 1) * golden-ratio increment.
std::uint64_t trial_seed(std::uint64_t seed, int k);

// Per-trial (or aggregated) series, indexed by t - 1.
struct MetricsSeries {
  std::vector<double> clock_rmse;   // ns, after removing the common offset
  std::vector<double> pos_rmse;     // m
  std::vector<double> full_branch;  // 1 if the full update ran (fraction when aggregated)
  std::vector<double> step_seconds;
  std::vector<double> sync_seconds;  // clock-update share of step_seconds
  double nlos_accuracy = 0.0;       // NaN if no agent-frame had NLoS links
  double nlos_cells = 0.0;          // agent-frames that entered nlos_accuracy
  int full_branch_count = 0;
  int reduced_branch_count = 0;
  int covered_growth = 0;           // steps where the covered set grew (max over trials when aggregated)
  int failed_agent_restarts = 0;
};

struct TrialTrace {
  std::vector<std::vector<AnchorSet>> selected;   // [t][n]
  std::vector<std::vector<AnchorSet>> true_nlos;  // [t][n]
  std::vector<std::vector<Vector>> est_positions;
  std::vector<std::vector<Vector>> true_positions;
  std::vector<Vector> delta_hat;
  std::vector<AnchorSet> covered;  // index 0 is the initial (empty) set
  Vector true_offsets;
};

struct TrialResult {
  MetricsSeries metrics;
  TrialTrace trace;  // empty unless requested
};

TrialResult run_trial(const ScenarioConfig& cfg, std::uint64_t seed, bool keep_trace = false,
                      SyncMethod sync_method = SyncMethod::Brmp);

// Root mean squared position error across agents.
double position_rmse(const std::vector<Vector>& est, const std::vector<Vector>& truth);

// RMS of (est - truth) after removing its mean over all anchors.
double aligned_clock_rmse(const Vector& est, const Vector& truth);

// Share of the true NLoS links left out of the selected set. Agent-frames
// with no NLoS links are skipped; NaN if every cell is skipped.
double nlos_accuracy(const std::vector<AnchorSet>& selected,
                     const std::vector<AnchorSet>& true_nlos);

// Trials run on OpenMP threads (threads <= 0: runtime default); reduction is
// in trial order, so the result does not depend on the thread count.
MetricsSeries run_monte_carlo(const ScenarioConfig& cfg, int threads = 0);

// Single-threaded reference for run_monte_carlo.
MetricsSeries run_monte_carlo_serial(const ScenarioConfig& cfg);

MetricsSeries aggregate(const std::vector<MetricsSeries>& trials);

struct RuntimeSeries {
  std::vector<double> brmp_seconds;
  std::vector<double> direct_seconds;
  std::vector<double> brmp_sync_seconds;  // clock update only
  std::vector<double> direct_sync_seconds;
  double max_position_gap = 0.0;  // largest |p_brmp - p_direct| seen, m
};

// Times full engine steps with the recursive and the re-solve-everything
// clock update on identical frames, averaged over cfg.trials trials.
RuntimeSeries runtime_comparison(const ScenarioConfig& cfg);

// Least-squares slope of ys against 1..n.
double regression_slope(const std::vector<double>& ys);

double mean_over(const std::vector<double>& xs, int from_t, int to_t);

}  // namespace toa
