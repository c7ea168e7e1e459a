#include "toa/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "toa/errors.hpp"
#include "toa/localize.hpp"
#include "toa/oracles.hpp"
#include "toa/sim.hpp"

namespace toa::verify {

namespace {

constexpr double kEquivalenceTol = 1e-7;
constexpr double kReducedTol = 1e-9;
constexpr double kPenroseTol = 1e-10;
constexpr double kGradientTol = 1e-5;

void record(BatteryReport& rep, double err, std::uint64_t case_seed) {
  ++rep.cases;
  rep.max_error = std::max(rep.max_error, err);
  if (!(err <= rep.tolerance)) {
    ++rep.failures;
    if (rep.failing_seeds.empty() || rep.failing_seeds.back() != case_seed) {
      rep.failing_seeds.push_back(case_seed);
    }
  }
}

AnchorSet random_subset(int m, int size, Rng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(static_cast<std::size_t>(size));
  return AnchorSet::from_unsorted(idx, m);
}

double max_abs(const Matrix& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

UpdateFns UpdateFns::production() {
  UpdateFns f;
  f.full = [](const SyncState& s, const MeasurementBlock& b) { return brmp_update_full(s, b); };
  f.reduced = [](const SyncState& s, const MeasurementBlock& b) {
    return brmp_update_reduced(s, b);
  };
  return f;
}

RecursionReports recursion_battery(int cases, std::uint64_t seed, const UpdateFns& fns) {
  static constexpr double kLambdas[] = {1.0, 0.9, 0.8};
  RecursionReports out;
  out.equivalence.name = "brmp_vs_direct";
  out.equivalence.tolerance = kEquivalenceTol;
  out.reduced.name = "reduced_branch";
  out.reduced.tolerance = kReducedTol;
  int reduced_steps = 0;

  for (int i = 0; i < cases; ++i) {
    const std::uint64_t case_seed = trial_seed(seed, i);
    Rng rng(case_seed);
    const double lambda = kLambdas[i % 3];
    const int m = std::uniform_int_distribution<int>(3, 10)(rng);
    const int n_agents = std::uniform_int_distribution<int>(1, 3)(rng);
    const int t_max = std::uniform_int_distribution<int>(1, 20)(rng);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector truth(m);
    for (int k = 0; k < m; ++k) truth(k) = 8.0 * gauss(rng);

    SyncState state = init_sync(m, lambda);
    std::vector<MeasurementBlock> blocks;
    double worst = 0.0;
    for (int t = 1; t <= t_max; ++t) {
      MeasurementBlock block;
      int rows = 0;
      for (int n = 0; n < n_agents; ++n) {
        const int size = std::uniform_int_distribution<int>(m / 2 + 1, m)(rng);
        block.row_sets.push_back(random_subset(m, size, rng));
        rows += size;
      }
      block.a_block = Matrix::Zero(rows, m);
      int row = 0;
      for (const auto& s : block.row_sets) {
        block.a_block.middleRows(row, s.size()) = reduced_row_matrix(s, m);
        row += s.size();
      }
      block.y_block = block.a_block * truth;
      for (int r = 0; r < rows; ++r) block.y_block(r) += 0.3 * gauss(rng);

      if (reduced_update_applies(block.row_sets, state)) {
        ++reduced_steps;
        FullUpdateDiagnostics diag;
        const SyncState full = brmp_update_full(state, block, kSyncRankTol, &diag);
        const SyncState red = fns.reduced(state, block);
        double err = diag.c_max_abs;
        err = std::max(err, (full.delta_hat - red.delta_hat).cwiseAbs().maxCoeff());
        err = std::max(err, max_abs(full.q_mat - red.q_mat));
        err = std::max(err, max_abs(full.r_mat - red.r_mat));
        record(out.reduced, err, case_seed);
        state = red;
      } else {
        AnchorSet covered = state.covered_set;
        for (const auto& s : block.row_sets) covered = covered.united(s);
        state = fns.full(state, block);
        state.covered_set = covered;
      }
      blocks.push_back(block);
      const Vector direct = oracle::weighted_min_norm(blocks, lambda);
      worst = std::max(worst,
                       (state.delta_hat - direct).norm() / (1.0 + direct.norm()));
    }
    record(out.equivalence, worst, case_seed);
  }
  out.reduced.note = std::to_string(reduced_steps) + " reduced steps checked";
  return out;
}

BatteryReport penrose_battery(int cases, std::uint64_t seed) {
  BatteryReport rep;
  rep.name = "penrose";
  rep.tolerance = kPenroseTol;
  for (int i = 0; i < cases; ++i) {
    const std::uint64_t case_seed = trial_seed(seed, i);
    Rng rng(case_seed);
    std::uniform_int_distribution<int> dim(1, 12);
    const int rows = dim(rng);
    const int cols = dim(rng);
    const int rank = std::uniform_int_distribution<int>(0, std::min(rows, cols))(rng);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix u(rows, std::max(rank, 1));
    Matrix v(std::max(rank, 1), cols);
    for (Eigen::Index r = 0; r < u.size(); ++r) u.data()[r] = gauss(rng);
    for (Eigen::Index r = 0; r < v.size(); ++r) v.data()[r] = gauss(rng);
    const Matrix a = rank == 0 ? Matrix::Zero(rows, cols) : Matrix(u.leftCols(rank) * v.topRows(rank));
    const Matrix x = linalg::mp_pinv(a);
    record(rep, oracle::penrose(a, x).max(), case_seed);
  }
  return rep;
}

BatteryReport gradient_battery(int cases, std::uint64_t seed) {
  BatteryReport rep;
  rep.name = "gradient_fd";
  rep.tolerance = kGradientTol;
  for (int i = 0; i < cases; ++i) {
    const std::uint64_t case_seed = trial_seed(seed, i);
    Rng rng(case_seed);
    std::uniform_real_distribution<double> coord(0.0, 30.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int dim = 2 + i % 2;
    const int m = std::uniform_int_distribution<int>(dim + 2, 12)(rng);
    NetworkGeometry geom;
    geom.dim = dim;
    geom.anchors.resize(dim, m);
    for (Eigen::Index k = 0; k < geom.anchors.size(); ++k) geom.anchors.data()[k] = coord(rng);
    Vector p(dim);
    for (int d = 0; d < dim; ++d) p(d) = coord(rng);
    Vector r(m);
    Vector delta(m);
    for (int k = 0; k < m; ++k) {
      r(k) = 100.0 + 20.0 * gauss(rng);
      delta(k) = 5.0 * gauss(rng);
    }
    const int size = std::uniform_int_distribution<int>(dim + 2, m)(rng);
    const AnchorSet s = random_subset(m, size, rng);

    const Vector analytic = objective_and_gradient(p, s, r, delta, geom).gradient;
    const auto f = [&](const Vector& q) { return oracle::subset_objective(q, s, r, delta, geom); };
    const Vector fd = oracle::central_difference(f, p, 1e-4);
    const double err = (analytic - fd).norm() / std::max(fd.norm(), 1e-8);
    record(rep, err, case_seed);
  }
  return rep;
}

BatteryReport rlsr_subset_battery(int cases, std::uint64_t seed, double min_share) {
  BatteryReport rep;
  rep.name = "rlsr_exhaustive";
  rep.tolerance = 0.0;
  int matched = 0;
  int skipped = 0;
  int attempt = 0;
  while (rep.cases < cases) {
    const std::uint64_t case_seed = trial_seed(seed, attempt++);
    Rng rng(case_seed);
    const int m = std::uniform_int_distribution<int>(6, 8)(rng);
    // Anchors on a jittered ring of radius 10 m, agent inside it.
    constexpr double kPi = 3.14159265358979323846;
    std::uniform_real_distribution<double> jitter(-0.25, 0.25);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    NetworkGeometry geom;
    geom.dim = 2;
    geom.anchors.resize(2, m);
    for (int k = 0; k < m; ++k) {
      const double a = 2.0 * kPi * (k + jitter(rng)) / m;
      geom.anchors(0, k) = 10.0 + 10.0 * std::cos(a);
      geom.anchors(1, k) = 10.0 + 10.0 * std::sin(a);
    }
    const double heading = 2.0 * kPi * unit(rng);
    const double radius = 6.0 * std::sqrt(unit(rng));
    Vector p(2);
    p << 10.0 + radius * std::cos(heading), 10.0 + radius * std::sin(heading);
    const int bad = std::uniform_int_distribution<int>(0, m - 1)(rng);
    const double bias = std::uniform_real_distribution<double>(10.0, 40.0)(rng);

    Vector delta = Vector::Zero(m);
    Vector r = distance_vector(p, geom).array() + 30.0;
    r(bad) += bias;

    const int keep = m - 1;
    const auto ranked = oracle::exhaustive_subsets(r, delta, geom, keep);
    // Unique, well separated optimum only.
    if (ranked.size() < 2 || !(ranked[0].fit.objective < 1e-12) ||
        !(ranked[1].fit.objective > 1e-2)) {
      ++skipped;
      if (attempt > 20 * cases) break;
      continue;
    }

    LocalizationConfig cfg;
    cfg.alpha = static_cast<double>(keep) / m;
    cfg.init_strategy = InitStrategy::AnchorCentroid;
    const LocalizationResult res =
        rlsr_localize(r, delta, geom, cfg, centroid_start(geom, cfg));
    ++rep.cases;
    if (res.selected_set == ranked[0].set) {
      ++matched;
    } else {
      rep.failing_seeds.push_back(case_seed);
    }
  }
  const double share = rep.cases ? static_cast<double>(matched) / rep.cases : 0.0;
  rep.max_error = 1.0 - share;
  rep.tolerance = 1.0 - min_share;
  rep.failures = share >= min_share ? 0 : rep.cases - matched;
  rep.note = std::to_string(matched) + "/" + std::to_string(rep.cases) + " matched, " +
             std::to_string(skipped) + " ambiguous instances skipped";
  return rep;
}

std::vector<BatteryReport> run_all(std::uint64_t seed) {
  std::vector<BatteryReport> out;
  RecursionReports rec = recursion_battery(240, seed);
  out.push_back(std::move(rec.equivalence));
  out.push_back(std::move(rec.reduced));
  out.push_back(penrose_battery(200, seed));
  out.push_back(gradient_battery(100, seed));
  out.push_back(rlsr_subset_battery(100, seed));
  return out;
}

void write_report(std::ostream& os, const std::vector<BatteryReport>& reports) {
  char line[256];
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-18s %s cases=%d failures=%d max_error=%.3e tol=%.1e",
                  r.name.c_str(), r.passed() ? "PASS" : "FAIL", r.cases, r.failures,
                  r.max_error, r.tolerance);
    os << line;
    if (!r.note.empty()) os << "  (" << r.note << ")";
    os << '\n';
    if (!r.failing_seeds.empty()) {
      os << "  failing seeds:";
      const std::size_t shown = std::min<std::size_t>(r.failing_seeds.size(), 20);
      for (std::size_t i = 0; i < shown; ++i) os << ' ' << r.failing_seeds[i];
      if (shown < r.failing_seeds.size()) os << " ...";
      os << '\n';
    }
  }
}

}  // namespace toa::verify
