#pragma once

// Single-agent NLoS identification and localisation. Alternates a
// quasi-Newton position fit over the current anchor subset with a trim step
// that keeps the ceil(alpha * M) anchors with the smallest centred residuals.

#include <optional>

#include "toa/anchor_set.hpp"
#include "toa/linalg.hpp"
#include "toa/model.hpp"

namespace toa {

enum class InitStrategy { PreviousEstimate, AnchorCentroid };

// How the trim step removes the common transmit-time term from the residual.
enum class ResidualCentering {
  AllAnchors,  // subtract the mean over all M anchors
  FittedSet,   // subtract the mean over the subset the position was fitted on
};

struct LocalizationConfig {
  double alpha = 0.88;
  int k_max = 20;
  int k_ne = 50;
  double grad_tol = 1e-9;
  double max_step = 4.0;  // m, longest quasi-Newton step
  InitStrategy init_strategy = InitStrategy::PreviousEstimate;
  ResidualCentering centering = ResidualCentering::FittedSet;
  // Nominal agent height (3-D geometry only). Seeds the centroid start; with
  // fix_height the height is held there and only x, y are estimated.
  std::optional<double> agent_height;
  bool fix_height = false;

  void validate() const;
  int keep_count(int m) const;
};

// Distance below which a position counts as coincident with an anchor.
inline constexpr double kAnchorExclusionRadius = 1e-9;

struct ObjectiveValue {
  double value = 0.0;
  Vector gradient;
};

// f(p) = || B(s) F(s) (r - d(p) - delta_hat) ||^2 and its gradient.
// Throws SingularityError if p is within kAnchorExclusionRadius of an anchor
// in s.
ObjectiveValue objective_and_gradient(const Vector& p, const AnchorSet& s, const Vector& r,
                                      const Vector& delta_hat, const NetworkGeometry& geom);

enum class SolveStatus { GradientTolerance, Stalled, IterationLimit };

struct PositionSolve {
  Vector position;
  double objective = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::IterationLimit;

  bool converged() const noexcept { return status != SolveStatus::IterationLimit; }
};

// BFGS with Armijo backtracking. Returns the best iterate found; never
// returns a point with a larger objective than p_init.
PositionSolve solve_position(const Vector& r, const AnchorSet& s, const Vector& delta_hat,
                             const Vector& p_init, const NetworkGeometry& geom,
                             const LocalizationConfig& cfg);

// B(M) (r - d(p_hat) - delta_hat).
Vector residual_vector(const Vector& r, const Vector& p_hat, const Vector& delta_hat,
                       const NetworkGeometry& geom);

// r - d(p_hat) - delta_hat - tau_hat, with tau_hat the mean of that
// difference over s (the transmit time that is optimal for subset s).
// Entries sum to zero over s.
Vector subset_residual_vector(const Vector& r, const Vector& p_hat, const Vector& delta_hat,
                              const AnchorSet& s, const NetworkGeometry& geom);

// Indices of the `keep` entries of e with smallest magnitude, ties broken by
// lower index, returned in increasing order.
AnchorSet select_los_set(const Vector& e, int keep);
AnchorSet select_los_set(const Vector& e, int m, double alpha);

struct LocalizationResult {
  Vector position;
  AnchorSet selected_set;
  int outer_iters = 0;
  bool converged_by_set = false;
  bool solver_converged = true;
  double final_objective = 0.0;
};

LocalizationResult rlsr_localize(const Vector& r, const Vector& delta_hat,
                                 const NetworkGeometry& geom, const LocalizationConfig& cfg,
                                 const Vector& p_init);

// One position fit over a caller-chosen subset (no trimming). Used by the
// all-anchor and known-LoS baselines.
LocalizationResult localize_with_set(const Vector& r, const AnchorSet& s, const Vector& delta_hat,
                                     const NetworkGeometry& geom, const LocalizationConfig& cfg,
                                     const Vector& p_init);

// Anchor centroid, with the height replaced by cfg.agent_height if set.
Vector centroid_start(const NetworkGeometry& geom, const LocalizationConfig& cfg);

}  // namespace toa
