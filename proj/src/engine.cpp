#include "toa/engine.hpp"

#include <chrono>
#include <string>

#include "toa/errors.hpp"

namespace toa {

Engine::Engine(NetworkGeometry geom, EngineConfig cfg, int n_agents) {
  geom.validate();
  cfg.loc.validate();
  if (n_agents < 1) throw InvalidInput("engine: need at least one agent");
  state_.sync = init_sync(geom.anchor_count(), cfg.lambda);
  state_.geom = std::move(geom);
  state_.cfg = std::move(cfg);
  state_.last_positions.assign(static_cast<std::size_t>(n_agents), std::nullopt);
}

namespace {

LocalizationResult localize_agent(const EngineState& st, const ToaFrame& frame, int n,
                                  const Vector& p_init) {
  const Vector& r = frame.measurements[static_cast<std::size_t>(n)];
  const Vector& delta = st.sync.delta_hat;
  switch (st.cfg.selection) {
    case SelectionMode::Rlsr:
      return rlsr_localize(r, delta, st.geom, st.cfg.loc, p_init);
    case SelectionMode::All:
      return localize_with_set(r, AnchorSet::full(st.geom.anchor_count()), delta, st.geom,
                               st.cfg.loc, p_init);
    case SelectionMode::Oracle:
      if (!frame.truth) throw InvalidInput("oracle selection needs frame truth");
      return localize_with_set(r, (*frame.truth)[static_cast<std::size_t>(n)].los_set, delta,
                               st.geom, st.cfg.loc, p_init);
  }
  throw InvalidInput("unknown selection mode");
}

}  // namespace

StepResult Engine::step(const ToaFrame& frame) {
  const int n_agents = static_cast<int>(state_.last_positions.size());
  if (frame.agent_count() != n_agents) {
    throw InvalidInput("engine: frame has " + std::to_string(frame.agent_count()) +
                       " agents, expected " + std::to_string(n_agents));
  }
  if (frame.t != state_.history_len + 1) {
    throw InvalidInput("engine: expected frame t = " + std::to_string(state_.history_len + 1) +
                       ", got " + std::to_string(frame.t));
  }

  StepResult out;
  out.agents.reserve(static_cast<std::size_t>(n_agents));
  const Vector centroid = centroid_start(state_.geom, state_.cfg.loc);
  for (int n = 0; n < n_agents; ++n) {
    const auto& last = state_.last_positions[static_cast<std::size_t>(n)];
    const bool warm = state_.cfg.loc.init_strategy == InitStrategy::PreviousEstimate && last;
    try {
      out.agents.push_back(localize_agent(state_, frame, n, warm ? *last : centroid));
    } catch (const SingularityError&) {
      if (!warm) {
        throw SingularityError("engine: agent " + std::to_string(n) + " at t = " +
                               std::to_string(frame.t) + " has a singular start point");
      }
      ++out.failed_agents;
      out.agents.push_back(localize_agent(state_, frame, n, centroid));
    }
  }

  std::vector<AnchorSet> selections;
  std::vector<Vector> positions;
  selections.reserve(out.agents.size());
  positions.reserve(out.agents.size());
  for (const auto& a : out.agents) {
    selections.push_back(a.selected_set);
    positions.push_back(a.position);
  }
  const auto sync_start = std::chrono::steady_clock::now();
  MeasurementBlock block = assemble_block(frame, selections, positions, state_.geom);

  SyncState& sync = state_.sync;
  out.reduced_branch = reduced_update_applies(selections, sync);
  AnchorSet covered = sync.covered_set;
  if (!out.reduced_branch) {
    for (const auto& s : selections) covered = covered.united(s);
  }

  if (state_.cfg.sync_method == SyncMethod::Direct) {
    state_.blocks.push_back(std::move(block));
    const int t = sync.t + 1;
    sync.delta_hat = direct_lls_solve(state_.blocks, sync.lambda);
    sync.t = t;
  } else if (out.reduced_branch) {
    sync = brmp_update_reduced(sync, block);
  } else {
    sync = brmp_update_full(sync, block, state_.cfg.rank_tol);
  }
  out.sync_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - sync_start).count();
  out.covered_grew = !(covered == sync.covered_set);
  sync.covered_set = std::move(covered);

  for (int n = 0; n < n_agents; ++n) {
    state_.last_positions[static_cast<std::size_t>(n)] =
        out.agents[static_cast<std::size_t>(n)].position;
  }
  ++state_.history_len;
  return out;
}

int covered_set_growth_count(const std::vector<AnchorSet>& covered_trace) {
  int count = 0;
  for (std::size_t i = 1; i < covered_trace.size(); ++i) {
    if (!(covered_trace[i] == covered_trace[i - 1])) ++count;
  }
  return count;
}

}  // namespace toa
