#pragma once

// YAML scenario files. Every key is optional; missing keys keep the built-in
// defaults of ScenarioConfig.
//
//   scenario:  { m, n_agents, area_side, anchor_height, agent_height }
//   noise:     { sigma, nlos_fraction, nlos_range: [lo, hi],
//                offset_range: [lo, hi], tx_time_range: [lo, hi] }
//   algorithm: { lambda, alpha, selection_mode, k_max, k_ne, grad_tol,
//                fix_height, centering, init_strategy }
//   run:       { t_max, trials, seed }

#include <string>

#include "toa/errors.hpp"
#include "toa/sim.hpp"

namespace toa {

// Parse or validation failure, with the offending field and line where known.
class ConfigError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

ScenarioConfig parse_config(const std::string& text, const std::string& origin = "<string>",
                            ScenarioConfig base = {});
ScenarioConfig load_config(const std::string& path, ScenarioConfig base = {});

std::string to_string(ResidualCentering c);
std::string to_string(InitStrategy s);
ResidualCentering centering_from_string(const std::string& s);
InitStrategy init_strategy_from_string(const std::string& s);

}  // namespace toa
