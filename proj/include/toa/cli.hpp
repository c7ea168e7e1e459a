#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "toa/sim.hpp"

namespace toa::cli {

inline constexpr const char* kArtifactVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kRuntimeFailure = 1, kUsageError = 2 };

// Entry point of the toa_rtls tool. Subcommands: run, sweep, bench, verify.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Locale-independent shortest round-trip formatting used in every CSV.
std::string format_number(double v);

// Plain CSV writers, exposed for tests.
void write_rmse_csv(std::ostream& os, const MetricsSeries& ms);
void write_runtime_csv(std::ostream& os, const RuntimeSeries& rs);

struct SweepRow {
  double value = 0.0;
  SelectionMode mode = SelectionMode::Rlsr;
  double avg_clock_rmse = 0.0;
  double avg_pos_rmse = 0.0;
  double nlos_accuracy = 0.0;
};
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

// First time instance included in the "steady state" averages: t > 100, or
// every t when the run is shorter than that.
int steady_state_start(int t_max);

}  // namespace toa::cli
