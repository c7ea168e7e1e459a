#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "toa/oracles.hpp"
#include "toa/sim.hpp"
#include "toa/verify.hpp"

using namespace toa;

TEST_CASE("batteries pass on the production code") {
  const auto rec = verify::recursion_battery(60, 5);
  CHECK(rec.equivalence.passed());
  CHECK(rec.reduced.passed());
  CHECK(rec.reduced.cases > 0);
  CHECK(verify::penrose_battery(60, 5).passed());
  CHECK(verify::gradient_battery(40, 5).passed());
  const auto rlsr = verify::rlsr_subset_battery(30, 5);
  CHECK(rlsr.passed());
  CHECK(rlsr.cases == 30);
}

TEST_CASE("planted fault: lambda forced to 1 in the R update") {
  verify::UpdateFns mutant;
  mutant.full = [](const SyncState& s, const MeasurementBlock& b) {
    SyncState one = s;
    one.lambda = 1.0;
    SyncState out = brmp_update_full(one, b);
    out.lambda = s.lambda;
    return out;
  };
  mutant.reduced = [](const SyncState& s, const MeasurementBlock& b) {
    SyncState one = s;
    one.lambda = 1.0;
    SyncState out = brmp_update_reduced(one, b);
    out.lambda = s.lambda;
    return out;
  };
  const int cases = 60;
  const auto rec = verify::recursion_battery(cases, 5, mutant);
  CHECK_FALSE(rec.equivalence.passed());
  // Cases cycle lambda through {1.0, 0.9, 0.8}; the fault is invisible at 1.0.
  for (int i = 0; i < cases; i += 3) {
    const auto seed = trial_seed(5, i);
    CHECK(std::find(rec.equivalence.failing_seeds.begin(), rec.equivalence.failing_seeds.end(),
                    seed) == rec.equivalence.failing_seeds.end());
  }
  std::ostringstream os;
  verify::write_report(os, {rec.equivalence});
  CHECK(os.str().find("FAIL") != std::string::npos);
  CHECK(os.str().find("failing seeds:") != std::string::npos);
}

TEST_CASE("planted fault: reduced update that ignores the block") {
  verify::UpdateFns lazy = verify::UpdateFns::production();
  lazy.reduced = [](const SyncState& s, const MeasurementBlock&) {
    SyncState out = s;
    ++out.t;
    return out;
  };
  const auto rec = verify::recursion_battery(30, 9, lazy);
  CHECK_FALSE(rec.reduced.passed());
  CHECK_FALSE(rec.equivalence.passed());
}

TEST_CASE("report lists every battery with its max error") {
  verify::BatteryReport a;
  a.name = "alpha";
  a.cases = 3;
  a.max_error = 1.5e-12;
  a.tolerance = 1e-9;
  std::ostringstream os;
  verify::write_report(os, {a});
  CHECK(os.str().find("alpha") != std::string::npos);
  CHECK(os.str().find("PASS") != std::string::npos);
  CHECK(os.str().find("max_error=1.500e-12") != std::string::npos);
}

TEST_CASE("oracle self-checks") {
  // The weighted min-norm oracle agrees with a hand-built example.
  MeasurementBlock b;
  b.a_block = reduced_row_matrix(AnchorSet::full(2), 2);
  b.y_block = (Vector(2) << -1.0, 1.0).finished();
  b.row_sets = {AnchorSet::full(2)};
  const Vector d = oracle::weighted_min_norm({b}, 0.8);
  CHECK(d(0) == doctest::Approx(-1.0));
  CHECK(d(1) == doctest::Approx(1.0));

  // Central differences are exact on quadratics up to round-off.
  const auto f = [](const Vector& x) { return x.squaredNorm(); };
  const Vector g = oracle::central_difference(f, (Vector(2) << 1.0, -2.0).finished(), 1e-3);
  CHECK(g(0) == doctest::Approx(2.0));
  CHECK(g(1) == doctest::Approx(-4.0));

  // A wrong pseudoinverse is flagged.
  const Matrix a = Matrix::Identity(2, 2);
  CHECK(oracle::penrose(a, 2.0 * a).max() > 0.5);
}
