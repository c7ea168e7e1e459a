#pragma once

// Self-verification batteries: the production code against the reference
// computations in oracles.hpp on seeded random cases.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "toa/sync.hpp"

namespace toa::verify {

struct BatteryReport {
  std::string name;
  int cases = 0;
  int failures = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  std::vector<std::uint64_t> failing_seeds;
  std::string note;

  bool passed() const noexcept { return cases > 0 && failures == 0; }
};

// The update functions the recursion battery drives. Swappable so a test can
// plant a fault and watch the battery catch it.
struct UpdateFns {
  std::function<SyncState(const SyncState&, const MeasurementBlock&)> full;
  std::function<SyncState(const SyncState&, const MeasurementBlock&)> reduced;

  static UpdateFns production();
};

struct RecursionReports {
  BatteryReport equivalence;  // recursion vs weighted min-norm oracle
  BatteryReport reduced;      // C_t = 0 and reduced == full where it applies
};

// Random streams with M <= 10, N <= 3, t <= 20, subsets larger than M/2 and
// lambda cycling through {1.0, 0.9, 0.8}.
RecursionReports recursion_battery(int cases, std::uint64_t seed,
                                   const UpdateFns& fns = UpdateFns::production());

BatteryReport penrose_battery(int cases, std::uint64_t seed);
BatteryReport gradient_battery(int cases, std::uint64_t seed);

// Noiseless single-NLoS instances on M <= 8 anchors. Passes when the
// returned subset matches the exhaustive optimum in at least `min_share`.
BatteryReport rlsr_subset_battery(int cases, std::uint64_t seed, double min_share = 0.95);

std::vector<BatteryReport> run_all(std::uint64_t seed);

void write_report(std::ostream& os, const std::vector<BatteryReport>& reports);

}  // namespace toa::verify
