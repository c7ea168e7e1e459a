#pragma once

// Per-time-instance driver: localise every agent against the previous clock
// offset estimate, then fold the frame into the BRMP recursion, taking the
// reduced update whenever the selected anchors are already covered.

#include <optional>
#include <vector>

#include "toa/localize.hpp"
#include "toa/sync.hpp"

namespace toa {

enum class SelectionMode {
  Rlsr,    // residual trimming
  All,     // every anchor, no trimming
  Oracle,  // true LoS set from frame truth
};

enum class SyncMethod {
  Brmp,    // recursive update
  Direct,  // re-solve the whole weighted stack every step (benchmark only)
};

struct EngineConfig {
  double lambda = 0.8;
  double rank_tol = kSyncRankTol;
  LocalizationConfig loc;
  SelectionMode selection = SelectionMode::Rlsr;
  SyncMethod sync_method = SyncMethod::Brmp;
};

struct EngineState {
  SyncState sync;
  NetworkGeometry geom;
  EngineConfig cfg;
  std::vector<std::optional<Vector>> last_positions;
  int history_len = 0;
  // Only populated for SyncMethod::Direct.
  std::vector<MeasurementBlock> blocks;
};

struct StepResult {
  std::vector<LocalizationResult> agents;
  bool reduced_branch = false;
  bool covered_grew = false;
  int failed_agents = 0;  // agents whose start point was singular and were restarted
  double sync_seconds = 0.0;  // block assembly plus clock update
};

class Engine {
 public:
  Engine(NetworkGeometry geom, EngineConfig cfg, int n_agents);

  // Processes frame t = history_len + 1.
  StepResult step(const ToaFrame& frame);

  const EngineState& state() const noexcept { return state_; }
  const Vector& delta_hat() const noexcept { return state_.sync.delta_hat; }

 private:
  EngineState state_;
};

// Number of steps in the trace whose covered set differs from the previous
// one. Index 0 of the trace is the initial state.
int covered_set_growth_count(const std::vector<AnchorSet>& covered_trace);

}  // namespace toa
