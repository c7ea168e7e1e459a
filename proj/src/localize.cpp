#include "toa/localize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "toa/errors.hpp"

namespace toa {

void LocalizationConfig::validate() const {
  if (!(alpha > 0.5 && alpha <= 1.0)) throw InvalidInput("alpha must lie in (0.5, 1]");
  if (k_max < 1) throw InvalidInput("k_max must be >= 1");
  if (k_ne < 1) throw InvalidInput("k_ne must be >= 1");
  if (!(grad_tol >= 0.0)) throw InvalidInput("grad_tol must be >= 0");
  if (!(max_step > 0.0)) throw InvalidInput("max_step must be positive");
  if (agent_height && !std::isfinite(*agent_height)) {
    throw InvalidInput("agent_height must be finite");
  }
  if (fix_height && !agent_height) {
    throw InvalidInput("fix_height requires agent_height");
  }
}

int LocalizationConfig::keep_count(int m) const {
  return std::clamp(ceil_count(alpha, m), 1, m);
}

ObjectiveValue objective_and_gradient(const Vector& p, const AnchorSet& s, const Vector& r,
                                      const Vector& delta_hat, const NetworkGeometry& geom) {
  const int m = geom.anchor_count();
  if (p.size() != geom.dim) throw InvalidInput("objective: position dimension mismatch");
  if (r.size() != m || delta_hat.size() != m) throw InvalidInput("objective: length mismatch");
  if (s.empty()) throw InvalidInput("objective: empty anchor subset");

  const int k = s.size();
  std::vector<double> w(static_cast<std::size_t>(k));
  std::vector<double> dist(static_cast<std::size_t>(k));
  double mean = 0.0;
  for (int i = 0; i < k; ++i) {
    const int a = s[i];
    const double rho = (geom.anchors.col(a) - p).norm();
    if (rho <= kAnchorExclusionRadius) {
      throw SingularityError("objective: position coincides with anchor " + std::to_string(a));
    }
    dist[static_cast<std::size_t>(i)] = rho;
    w[static_cast<std::size_t>(i)] = r(a) - rho / geom.c - delta_hat(a);
    mean += w[static_cast<std::size_t>(i)];
  }
  mean /= k;

  ObjectiveValue out;
  out.gradient = Vector::Zero(geom.dim);
  for (int i = 0; i < k; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    const double e = w[ii] - mean;
    out.value += e * e;
    // d/dp of -|q - p|/c is (q - p) / (c |q - p|).
    out.gradient += (2.0 * e / (geom.c * dist[ii])) * (geom.anchors.col(s[i]) - p);
  }
  return out;
}

namespace {

// Maps the free coordinates onto a full position (fixed height if known).
struct Parametrisation {
  int dim;
  std::optional<double> height;

  int free_dims() const { return height ? dim - 1 : dim; }
  Vector to_position(const Vector& x) const {
    if (!height) return x;
    Vector p(dim);
    p.head(dim - 1) = x;
    p(dim - 1) = *height;
    return p;
  }
  Vector to_free(const Vector& p) const { return p.head(free_dims()); }
};

}  // namespace

PositionSolve solve_position(const Vector& r, const AnchorSet& s, const Vector& delta_hat,
                             const Vector& p_init, const NetworkGeometry& geom,
                             const LocalizationConfig& cfg) {
  if (p_init.size() != geom.dim || !p_init.allFinite()) {
    throw InvalidInput("solve_position: bad initial position");
  }
  const Parametrisation par{geom.dim, geom.dim == 3 && cfg.fix_height ? cfg.agent_height : std::nullopt};
  const int nfree = par.free_dims();
  if (s.size() < nfree + 2) {
    throw InvalidInput("solve_position: need at least " + std::to_string(nfree + 2) +
                       " anchors in the subset");
  }

  auto evaluate = [&](const Vector& x) {
    ObjectiveValue v = objective_and_gradient(par.to_position(x), s, r, delta_hat, geom);
    v.gradient = v.gradient.head(nfree).eval();
    return v;
  };

  Vector x = par.to_free(p_init);
  ObjectiveValue cur = evaluate(x);
  Matrix h = Matrix::Identity(nfree, nfree);
  bool scaled = false;

  PositionSolve out;
  out.status = SolveStatus::IterationLimit;
  constexpr double kArmijo = 1e-4;
  constexpr double kRoundoff = 8.0 * std::numeric_limits<double>::epsilon();
  int it = 0;
  for (; it < cfg.k_ne; ++it) {
    const double gnorm = cur.gradient.norm();
    if (gnorm <= cfg.grad_tol) {
      out.status = SolveStatus::GradientTolerance;
      break;
    }
    Vector dir = -h * cur.gradient;
    double slope = cur.gradient.dot(dir);
    if (!(slope < 0.0)) {
      h.setIdentity();
      scaled = false;
    }
    if (!scaled) {
      // No curvature information yet: unit-length steepest descent (1 m).
      dir = -cur.gradient / gnorm;
      slope = -gnorm;
    }

    // Far from the anchors the objective flattens to a finite plateau that
    // can sit below f at a poor start; cap the step so one jump cannot land
    // there.
    const double dir_norm = dir.norm();
    double step = dir_norm > cfg.max_step ? cfg.max_step / dir_norm : 1.0;
    bool accepted = false;
    Vector x_new;
    ObjectiveValue next;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      x_new = x + step * dir;
      try {
        next = evaluate(x_new);
      } catch (const SingularityError&) {
        continue;
      }
      if (next.value <= cur.value + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      // Near the minimum the predicted decrease drops below the resolution
      // of f; accept steps that stay within round-off and shrink the gradient.
      if (next.value <= cur.value + kRoundoff * std::abs(cur.value) &&
          next.gradient.norm() < gnorm) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.status = SolveStatus::Stalled;
      break;
    }

    const Vector sx = x_new - x;
    const Vector yg = next.gradient - cur.gradient;
    const double sy = sx.dot(yg);
    if (sy > 1e-16 * sx.norm() * yg.norm()) {
      if (!scaled) {
        h = Matrix::Identity(nfree, nfree) * (sy / yg.squaredNorm());
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Matrix left = Matrix::Identity(nfree, nfree) - rho * sx * yg.transpose();
      h = left * h * left.transpose() + rho * sx * sx.transpose();
    }
    x = x_new;
    cur = std::move(next);
  }
  if (out.status == SolveStatus::IterationLimit && cur.gradient.norm() <= cfg.grad_tol) {
    out.status = SolveStatus::GradientTolerance;
  }

  out.position = par.to_position(x);
  out.objective = cur.value;
  out.grad_norm = cur.gradient.norm();
  out.iterations = it;
  return out;
}

Vector residual_vector(const Vector& r, const Vector& p_hat, const Vector& delta_hat,
                       const NetworkGeometry& geom) {
  if (r.size() != geom.anchor_count() || delta_hat.size() != geom.anchor_count()) {
    throw InvalidInput("residual_vector: length mismatch");
  }
  Vector w = r - distance_vector(p_hat, geom) - delta_hat;
  w.array() -= w.mean();
  return w;
}

Vector subset_residual_vector(const Vector& r, const Vector& p_hat, const Vector& delta_hat,
                              const AnchorSet& s, const NetworkGeometry& geom) {
  if (r.size() != geom.anchor_count() || delta_hat.size() != geom.anchor_count()) {
    throw InvalidInput("subset_residual_vector: length mismatch");
  }
  if (s.empty()) throw InvalidInput("subset_residual_vector: empty subset");
  Vector w = r - distance_vector(p_hat, geom) - delta_hat;
  double tau = 0.0;
  for (int i : s) tau += w(i);
  w.array() -= tau / s.size();
  return w;
}

AnchorSet select_los_set(const Vector& e, int keep) {
  const auto m = static_cast<int>(e.size());
  if (keep < 1 || keep > m) throw InvalidInput("select_los_set: keep must lie in [1, M]");
  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return std::abs(e(a)) < std::abs(e(b)); });
  order.resize(static_cast<std::size_t>(keep));
  return AnchorSet::from_unsorted(std::move(order), m);
}

AnchorSet select_los_set(const Vector& e, int m, double alpha) {
  if (e.size() != m) throw InvalidInput("select_los_set: length mismatch");
  LocalizationConfig cfg;
  cfg.alpha = alpha;
  return select_los_set(e, cfg.keep_count(m));
}

LocalizationResult rlsr_localize(const Vector& r, const Vector& delta_hat,
                                 const NetworkGeometry& geom, const LocalizationConfig& cfg,
                                 const Vector& p_init) {
  cfg.validate();
  const int m = geom.anchor_count();
  const int keep = cfg.keep_count(m);

  LocalizationResult out;
  AnchorSet previous = AnchorSet::full(m);
  Vector p = p_init;
  for (int k = 1; k <= cfg.k_max; ++k) {
    const PositionSolve solve = solve_position(r, previous, delta_hat, p, geom, cfg);
    p = solve.position;
    out.solver_converged = out.solver_converged && solve.converged();
    const Vector e = cfg.centering == ResidualCentering::AllAnchors
                         ? residual_vector(r, p, delta_hat, geom)
                         : subset_residual_vector(r, p, delta_hat, previous, geom);
    const AnchorSet current = select_los_set(e, keep);
    out.outer_iters = k;
    out.selected_set = current;
    if (current == previous) {
      out.converged_by_set = true;
      break;
    }
    previous = current;
  }
  out.position = p;
  out.final_objective =
      objective_and_gradient(p, out.selected_set, r, delta_hat, geom).value;
  return out;
}

LocalizationResult localize_with_set(const Vector& r, const AnchorSet& s, const Vector& delta_hat,
                                     const NetworkGeometry& geom, const LocalizationConfig& cfg,
                                     const Vector& p_init) {
  const PositionSolve solve = solve_position(r, s, delta_hat, p_init, geom, cfg);
  LocalizationResult out;
  out.position = solve.position;
  out.selected_set = s;
  out.outer_iters = 1;
  out.converged_by_set = true;
  out.solver_converged = solve.converged();
  out.final_objective = solve.objective;
  return out;
}

Vector centroid_start(const NetworkGeometry& geom, const LocalizationConfig& cfg) {
  Vector p = geom.anchors.rowwise().mean();
  if (geom.dim == 3 && cfg.agent_height) p(2) = *cfg.agent_height;
  return p;
}

}  // namespace toa
