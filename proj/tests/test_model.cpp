#include <doctest.h>

#include <cmath>

#include "toa/errors.hpp"
#include "toa/model.hpp"

using namespace toa;

namespace {

AnchorSet set(std::vector<int> idx, int m) { return AnchorSet::from_sorted(std::move(idx), m); }

NetworkGeometry square_geometry() {
  return make_geometry(3, {{0, 0, 5}, {32, 0, 5}, {0, 32, 5}, {32, 32, 5}, {16, 16, 5}});
}

AgentTruth agent(const Vector& p, double tau, int m) {
  AgentTruth a;
  a.position = p;
  a.tx_time = tau;
  a.los_set = AnchorSet::full(m);
  a.nlos_errors = Vector::Zero(m);
  return a;
}

}  // namespace

TEST_CASE("AnchorSet basics") {
  const AnchorSet a = set({0, 2, 4}, 6);
  CHECK(a.size() == 3);
  CHECK(a.contains(2));
  CHECK_FALSE(a.contains(1));
  CHECK(a.complement(6) == set({1, 3, 5}, 6));
  CHECK(a.united(set({1, 2}, 6)) == set({0, 1, 2, 4}, 6));
  CHECK(set({2}, 6).is_subset_of(a));
  CHECK(AnchorSet{}.is_subset_of(a));
  CHECK_FALSE(a.is_subset_of(AnchorSet{}));
  CHECK(AnchorSet::from_unsorted({4, 0, 4, 2}, 6) == a);
  CHECK(a.to_string() == "{0,2,4}");
  CHECK_THROWS_AS(AnchorSet::from_sorted({2, 1}, 6), InvalidInput);
  CHECK_THROWS_AS(AnchorSet::from_sorted({1, 1}, 6), InvalidInput);
  CHECK_THROWS_AS(AnchorSet::from_sorted({6}, 6), InvalidInput);
  CHECK_THROWS_AS(AnchorSet::from_sorted({-1}, 6), InvalidInput);
}

TEST_CASE("selection_matrix examples") {
  Matrix expect(2, 3);
  expect << 1, 0, 0, 0, 0, 1;
  CHECK(selection_matrix(set({0, 2}, 3), 3) == expect);
  CHECK(selection_matrix(AnchorSet::full(3), 3) == Matrix::Identity(3, 3));
  Vector v(3);
  v << 5, 7, 9;
  const Vector picked = selection_matrix(set({1}, 3), 3) * v;
  CHECK(picked.size() == 1);
  CHECK(picked(0) == 7.0);
  CHECK_THROWS_AS(selection_matrix(AnchorSet{}, 3), InvalidInput);
  CHECK_THROWS_AS(selection_matrix(set({0, 3}, 4), 3), InvalidInput);
}

TEST_CASE("selection rows are orthonormal") {
  for (int m = 1; m <= 6; ++m) {
    for (int mask = 1; mask < (1 << m); ++mask) {
      std::vector<int> idx;
      for (int i = 0; i < m; ++i) {
        if (mask & (1 << i)) idx.push_back(i);
      }
      const AnchorSet s = set(idx, m);
      const Matrix f = selection_matrix(s, m);
      CHECK(f * f.transpose() == Matrix::Identity(s.size(), s.size()));
      const Matrix a = reduced_row_matrix(s, m);
      CHECK((a * Vector::Ones(m)).norm() <= 1e-12);
    }
  }
}

TEST_CASE("centering_matrix examples and properties") {
  Matrix b2(2, 2);
  b2 << 0.5, -0.5, -0.5, 0.5;
  CHECK(centering_matrix(2) == b2);
  CHECK(centering_matrix(1) == Matrix::Zero(1, 1));
  CHECK((centering_matrix(5) * Vector::Ones(5)).norm() <= 1e-15);
  CHECK_THROWS_AS(centering_matrix(0), InvalidInput);
  for (int k = 1; k <= 12; ++k) {
    const Matrix b = centering_matrix(k);
    CHECK((b * b - b).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((b - b.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("reduced_row_matrix examples") {
  Matrix full2(2, 2);
  full2 << 0.5, -0.5, -0.5, 0.5;
  CHECK(reduced_row_matrix(set({0, 1}, 2), 2) == full2);
  Matrix expect(2, 3);
  expect << 0.5, 0, -0.5, -0.5, 0, 0.5;
  CHECK(reduced_row_matrix(set({0, 2}, 3), 3) == expect);
}

TEST_CASE("distance_vector examples") {
  const NetworkGeometry g = make_geometry(3, {{0, 0, 0}, {10, 10, 10}}, 1.0);
  Vector p(3);
  p << 3, 4, 0;
  CHECK(distance_vector(p, g)(0) == 5.0);

  const NetworkGeometry sq = square_geometry();
  CHECK(distance_vector(sq.anchors.col(0), sq)(0) == 0.0);

  const NetworkGeometry g2 = make_geometry(2, {{0, 0}, {6, 8}}, 2.0);
  const Vector d = distance_vector(Vector::Zero(2), g2);
  CHECK(d(0) == 0.0);
  CHECK(d(1) == 5.0);
  CHECK_THROWS_AS(distance_vector(Vector::Zero(3), g2), InvalidInput);
}

TEST_CASE("geometry validation") {
  CHECK_THROWS_AS(make_geometry(3, {{0, 0, 0}}), InvalidInput);
  CHECK_THROWS_AS(make_geometry(4, {{0, 0, 0, 0}, {1, 1, 1, 1}}), InvalidInput);
  CHECK_THROWS_AS(make_geometry(2, {{0, 0}, {1, 1}}, 0.0), InvalidInput);
  CHECK_THROWS_AS(make_geometry(2, {{0, 0}, {1}}), InvalidInput);
}

TEST_CASE("generate_frame examples") {
  const NetworkGeometry g = square_geometry();
  const int m = g.anchor_count();
  Vector p(3);
  p << 7, 9, 1.5;
  Rng rng(1);

  const ToaFrame f0 = generate_frame(g, {agent(p, 0.0, m)}, Vector::Zero(m), 0.0, rng, 3);
  CHECK(f0.t == 3);
  CHECK(f0.truth.has_value());
  CHECK((f0.measurements[0] - distance_vector(p, g)).cwiseAbs().maxCoeff() == 0.0);

  const ToaFrame f1 =
      generate_frame(g, {agent(p, 0.0, m)}, Vector::Constant(m, 2.0), 0.0, rng);
  CHECK((f1.measurements[0] - f0.measurements[0] - Vector::Constant(m, 2.0)).norm() <= 1e-12);

  AgentTruth biased = agent(p, 0.0, m);
  biased.los_set = AnchorSet::from_sorted({0, 1, 3, 4}, m);
  biased.nlos_errors(2) = 20.0;
  const ToaFrame f2 = generate_frame(g, {biased}, Vector::Zero(m), 0.0, rng);
  const Vector diff = f2.measurements[0] - f0.measurements[0];
  CHECK(diff(2) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(diff.cwiseAbs().sum() == doctest::Approx(20.0).epsilon(1e-12));

  CHECK_THROWS_AS(generate_frame(g, {agent(p, 0.0, m)}, Vector::Zero(m - 1), 0.0, rng),
                  InvalidInput);
  CHECK_THROWS_AS(generate_frame(g, {agent(p, 0.0, m)}, Vector::Zero(m), -1.0, rng),
                  InvalidInput);
}

TEST_CASE("gauge shift leaves measurements bit-identical") {
  // Dyadic values keep (tau - k) + (delta + k) exact.
  const NetworkGeometry g = square_geometry();
  const int m = g.anchor_count();
  Vector p(3);
  p << 7, 9, 1.5;
  Vector delta(m);
  delta << 0.5, -1.25, 2.0, 0.75, -3.5;
  const double kappa = 4.25;
  Rng r1(99);
  Rng r2(99);
  const ToaFrame a = generate_frame(g, {agent(p, 40.0, m)}, delta, 0.4, r1);
  const ToaFrame b = generate_frame(g, {agent(p, 40.0 - kappa, m)},
                                    delta + Vector::Constant(m, kappa), 0.4, r2);
  CHECK(a.measurements[0] == b.measurements[0]);
}

TEST_CASE("noise standard deviation") {
  const NetworkGeometry g = square_geometry();
  const int m = g.anchor_count();
  Vector p(3);
  p << 7, 9, 1.5;
  Rng rng(2024);
  std::vector<AgentTruth> agents(20000, agent(p, 0.0, m));
  const ToaFrame f = generate_frame(g, agents, Vector::Zero(m), 0.4, rng);
  const Vector clean = distance_vector(p, g);
  double sum = 0.0;
  double sq = 0.0;
  int n = 0;
  for (const auto& r : f.measurements) {
    for (int k = 0; k < m; ++k) {
      const double e = r(k) - clean(k);
      sum += e;
      sq += e * e;
      ++n;
    }
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  CHECK(n >= 100000);
  CHECK(std::abs(sd - 0.4) <= 0.02 * 0.4);
}

TEST_CASE("ceil_count") {
  CHECK(ceil_count(0.12, 25) == 3);
  CHECK(ceil_count(0.88, 25) == 22);
  CHECK(ceil_count(0.5, 4) == 2);
  CHECK(ceil_count(0.0, 9) == 0);
}
