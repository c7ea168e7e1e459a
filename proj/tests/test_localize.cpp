#include <doctest.h>

#include <random>

#include "toa/errors.hpp"
#include "toa/localize.hpp"
#include "toa/oracles.hpp"

using namespace toa;

namespace {

NetworkGeometry ring(int m, double radius = 10.0) {
  NetworkGeometry g;
  g.dim = 2;
  g.anchors.resize(2, m);
  for (int k = 0; k < m; ++k) {
    const double a = 2.0 * 3.14159265358979323846 * k / m + 0.3;
    g.anchors(0, k) = radius * std::cos(a);
    g.anchors(1, k) = radius * std::sin(a);
  }
  return g;
}

NetworkGeometry grid3d() {
  std::vector<std::vector<double>> q;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) q.push_back({i * 10.0, j * 10.0, 5.0 + (i + j) % 2});
  }
  return make_geometry(3, q);
}

Vector vec2(double x, double y) { return (Vector(2) << x, y).finished(); }

}  // namespace

TEST_CASE("objective is zero with zero gradient at an exact fit") {
  const NetworkGeometry g = ring(7);
  const Vector p = vec2(1.5, -2.0);
  Vector delta(7);
  delta << 1, -2, 3, 0.5, -0.25, 4, -6;
  const Vector r = distance_vector(p, g) + delta + Vector::Constant(7, 33.0);
  const ObjectiveValue v = objective_and_gradient(p, AnchorSet::full(7), r, delta, g);
  CHECK(v.value <= 1e-20);
  CHECK(v.gradient.norm() <= 1e-9);
}

TEST_CASE("singleton subset has identically zero objective") {
  const NetworkGeometry g = ring(5);
  const Vector r = Vector::LinSpaced(5, 10, 50);
  const ObjectiveValue v =
      objective_and_gradient(vec2(1, 1), AnchorSet::from_sorted({3}, 5), r, Vector::Zero(5), g);
  CHECK(v.value == 0.0);
  CHECK(v.gradient.norm() == 0.0);
}

TEST_CASE("gradient matches central differences") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  std::normal_distribution<double> n(0.0, 10.0);
  for (int c = 0; c < 100; ++c) {
    const NetworkGeometry g = c % 2 ? ring(9) : grid3d();
    const int m = g.anchor_count();
    Vector p(g.dim);
    for (int d = 0; d < g.dim; ++d) p(d) = u(rng) + (g.dim == 3 ? 15.0 : 0.0);
    Vector r(m);
    Vector delta(m);
    for (int k = 0; k < m; ++k) {
      r(k) = 80.0 + n(rng);
      delta(k) = 0.2 * n(rng);
    }
    const AnchorSet s = AnchorSet::full(m);
    const Vector grad = objective_and_gradient(p, s, r, delta, g).gradient;
    const auto f = [&](const Vector& q) { return objective_and_gradient(q, s, r, delta, g).value; };
    const Vector fd = oracle::central_difference(f, p, 1e-6);
    CHECK((grad - fd).norm() <= 1e-5 * std::max(fd.norm(), 1e-6));
  }
}

TEST_CASE("objective agrees with the long-hand oracle") {
  const NetworkGeometry g = grid3d();
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 5.0);
  Vector r(16);
  Vector delta(16);
  for (int k = 0; k < 16; ++k) {
    r(k) = 60 + n(rng);
    delta(k) = n(rng);
  }
  Vector p(3);
  p << 12, 7, 1.5;
  const AnchorSet s = AnchorSet::from_sorted({0, 2, 3, 5, 8, 9, 13}, 16);
  CHECK(objective_and_gradient(p, s, r, delta, g).value ==
        doctest::Approx(oracle::subset_objective(p, s, r, delta, g)).epsilon(1e-12));
}

TEST_CASE("gradient is undefined on an anchor") {
  const NetworkGeometry g = ring(5);
  CHECK_THROWS_AS(objective_and_gradient(g.anchors.col(2), AnchorSet::full(5), Vector::Zero(5),
                                         Vector::Zero(5), g),
                  SingularityError);
  // Not an error if that anchor is outside the subset.
  CHECK_NOTHROW(objective_and_gradient(g.anchors.col(2), AnchorSet::from_sorted({0, 1, 3, 4}, 5),
                                       Vector::Zero(5), Vector::Zero(5), g));
}

TEST_CASE("solve_position: noiseless fixed point from a nearby start") {
  const NetworkGeometry g = grid3d();
  const int m = g.anchor_count();
  Vector p(3);
  p << 13, 21, 1.5;
  Vector delta = Vector::LinSpaced(m, -4, 4);
  const Vector r = distance_vector(p, g) + delta + Vector::Constant(m, 50.0);
  LocalizationConfig cfg;
  Vector start = p;
  start(0) += 1.2;
  start(1) -= 1.1;
  start(2) += 0.7;
  const PositionSolve sol = solve_position(r, AnchorSet::full(m), delta, start, g, cfg);
  CHECK((sol.position - p).norm() <= 1e-6);
  CHECK(sol.objective <= 1e-12);

  const PositionSolve at_truth = solve_position(r, AnchorSet::full(m), delta, p, g, cfg);
  CHECK(at_truth.iterations <= 1);
  CHECK((at_truth.position - p).norm() <= 1e-9);
}

TEST_CASE("solve_position never ends above its start") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 30.0);
  std::normal_distribution<double> n(0.0, 3.0);
  const NetworkGeometry g = grid3d();
  const int m = g.anchor_count();
  LocalizationConfig cfg;
  cfg.k_ne = 5;
  for (int c = 0; c < 50; ++c) {
    Vector r(m);
    for (int k = 0; k < m; ++k) r(k) = 70 + n(rng);
    Vector p0(3);
    p0 << u(rng), u(rng), 1.5;
    const AnchorSet s = AnchorSet::full(m);
    const double f0 = objective_and_gradient(p0, s, r, Vector::Zero(m), g).value;
    const PositionSolve sol = solve_position(r, s, Vector::Zero(m), p0, g, cfg);
    CHECK(sol.objective <= f0);
    CHECK(sol.iterations <= 5);
  }
}

TEST_CASE("solve_position with a fixed height only moves x and y") {
  const NetworkGeometry g = grid3d();
  const int m = g.anchor_count();
  Vector p(3);
  p << 8, 17, 1.5;
  const Vector r = distance_vector(p, g);
  LocalizationConfig cfg;
  cfg.agent_height = 1.5;
  cfg.fix_height = true;
  const PositionSolve sol =
      solve_position(r, AnchorSet::full(m), Vector::Zero(m), centroid_start(g, cfg), g, cfg);
  CHECK(sol.position(2) == 1.5);
  CHECK((sol.position - p).norm() <= 1e-6);
}

TEST_CASE("solve_position precondition") {
  const NetworkGeometry g = ring(6);
  LocalizationConfig cfg;
  CHECK_THROWS_AS(solve_position(Vector::Zero(6), AnchorSet::from_sorted({0, 1, 2}, 6),
                                 Vector::Zero(6), vec2(0, 0), g, cfg),
                  InvalidInput);
}

TEST_CASE("residual_vector examples") {
  const NetworkGeometry g = ring(2);
  const Vector p = vec2(1, 1);
  const Vector d = distance_vector(p, g);
  Vector delta(2);
  delta << 0.5, -0.5;
  CHECK(residual_vector(d + delta, p, delta, g).norm() <= 1e-12);
  const Vector e = residual_vector(d + delta + vec2(4, 6), p, delta, g);
  CHECK(e(0) == doctest::Approx(-1.0));
  CHECK(e(1) == doctest::Approx(1.0));
  const Vector shifted = residual_vector(d + delta + vec2(4, 6) + Vector::Constant(2, 7.5), p, delta, g);
  CHECK((shifted - e).norm() <= 1e-12);
}

TEST_CASE("residual centring options sum to zero") {
  const NetworkGeometry g = ring(8);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 20.0);
  Vector r(8);
  for (int k = 0; k < 8; ++k) r(k) = n(rng);
  const Vector p = vec2(2, -3);
  CHECK(std::abs(residual_vector(r, p, Vector::Zero(8), g).sum()) <= 1e-10);
  const AnchorSet s = AnchorSet::from_sorted({0, 2, 3, 6, 7}, 8);
  const Vector e = subset_residual_vector(r, p, Vector::Zero(8), s, g);
  double sum = 0.0;
  for (int k : s) sum += e(k);
  CHECK(std::abs(sum) <= 1e-10);
}

TEST_CASE("select_los_set examples") {
  Vector e(5);
  e << 0.1, -5, 0.2, 0.05, 3;
  CHECK(select_los_set(e, 3) == AnchorSet::from_sorted({0, 2, 3}, 5));
  CHECK(select_los_set(Vector::Constant(3, 2.0), 2) == AnchorSet::from_sorted({0, 1}, 3));
  CHECK(select_los_set(Vector::LinSpaced(25, -1, 1), 25, 0.88).size() == 22);
  CHECK_THROWS_AS(select_los_set(e, 6), InvalidInput);
}

TEST_CASE("config validation") {
  LocalizationConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.alpha = 0.5;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  cfg.alpha = 0.9;
  cfg.k_max = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  cfg.k_max = 3;
  cfg.k_ne = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  CHECK(LocalizationConfig{}.keep_count(25) == 22);
}

TEST_CASE("rlsr_localize: noiseless all-LoS") {
  const NetworkGeometry g = grid3d();
  const int m = g.anchor_count();
  Vector p(3);
  p << 22, 9, 1.5;
  const Vector delta = Vector::LinSpaced(m, -3, 3);
  const Vector r = distance_vector(p, g) + delta + Vector::Constant(m, 12.0);
  LocalizationConfig cfg;
  cfg.init_strategy = InitStrategy::AnchorCentroid;
  cfg.agent_height = 1.5;
  cfg.fix_height = true;
  const LocalizationResult res = rlsr_localize(r, delta, g, cfg, centroid_start(g, cfg));
  CHECK((res.position - p).norm() <= 1e-6);
  CHECK(res.selected_set.size() == cfg.keep_count(m));
  CHECK(res.converged_by_set);
}

TEST_CASE("rlsr_localize: one NLoS anchor matches the exhaustive optimum") {
  const int m = 6;
  const NetworkGeometry g = ring(m);
  for (int bad = 0; bad < m; ++bad) {
    const Vector p = vec2(1.0 + 0.3 * bad, -2.0 + 0.5 * bad);
    Vector r = distance_vector(p, g);
    r(bad) += 30.0;
    LocalizationConfig cfg;
    cfg.alpha = 5.0 / 6.0;
    const LocalizationResult res =
        rlsr_localize(r, Vector::Zero(m), g, cfg, centroid_start(g, cfg));
    const auto ranked = oracle::exhaustive_subsets(r, Vector::Zero(m), g, 5);
    CHECK(res.selected_set == AnchorSet::from_sorted({bad}, m).complement(m));
    CHECK(ranked.front().set == res.selected_set);
    CHECK((res.position - p).norm() <= 1e-6);
  }
}

TEST_CASE("rlsr_localize: K_max = 1") {
  const int m = 6;
  const NetworkGeometry g = ring(m);
  Vector r = distance_vector(vec2(2, 3), g);
  r(1) += 25.0;
  LocalizationConfig cfg;
  cfg.alpha = 5.0 / 6.0;
  cfg.k_max = 1;
  const LocalizationResult res = rlsr_localize(r, Vector::Zero(m), g, cfg, vec2(0, 0));
  CHECK(res.outer_iters == 1);
  CHECK_FALSE(res.converged_by_set);
  CHECK(res.selected_set.size() == 5);
}

TEST_CASE("rlsr_localize is invariant to a constant shift of the offsets") {
  const NetworkGeometry g = grid3d();
  const int m = g.anchor_count();
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n(0.0, 0.4);
  Vector p(3);
  p << 5, 26, 1.5;
  Vector r = distance_vector(p, g) + Vector::Constant(m, 40.0);
  for (int k = 0; k < m; ++k) r(k) += n(rng);
  r(3) += 22.0;
  r(11) += 15.0;
  // Dyadic offsets and shift so both paths see identical centred data.
  Vector delta = Vector::LinSpaced(m, -3.75, 3.75);
  LocalizationConfig cfg;
  cfg.alpha = 14.0 / 16.0;
  cfg.agent_height = 1.5;
  cfg.fix_height = true;
  const LocalizationResult a = rlsr_localize(r, delta, g, cfg, centroid_start(g, cfg));
  const LocalizationResult b =
      rlsr_localize(r, delta + Vector::Constant(m, 0.5), g, cfg, centroid_start(g, cfg));
  CHECK(a.selected_set == b.selected_set);
  CHECK((a.position - b.position).norm() <= 1e-9);
  CHECK_FALSE(a.selected_set.contains(3));
  CHECK_FALSE(a.selected_set.contains(11));
}
