#pragma once

// Reference computations used by the verification batteries. Each one takes
// a different numerical route from the production code it checks.

#include <functional>
#include <vector>

#include "toa/anchor_set.hpp"
#include "toa/linalg.hpp"
#include "toa/model.hpp"
#include "toa/sync.hpp"

namespace toa::oracle {

// Min-norm weighted least squares over all blocks, block u weighted by
// lambda^-(u+1), rescaled by the newest weight to stay finite. Solved by
// complete orthogonal decomposition rather than an SVD pseudoinverse.
Vector weighted_min_norm(const std::vector<MeasurementBlock>& blocks, double lambda);

// Largest residual of the four Penrose conditions, each relative to the norm
// of the quantity it should reproduce.
struct PenroseResiduals {
  double axa = 0.0;   // A X A = A
  double xax = 0.0;   // X A X = X
  double ax_sym = 0.0;
  double xa_sym = 0.0;

  double max() const;
};
PenroseResiduals penrose(const Matrix& a, const Matrix& x);

// Central differences with step h per coordinate.
Vector central_difference(const std::function<double(const Vector&)>& f, const Vector& p,
                          double h);

// Localisation objective evaluated the long way: explicit transmit time as
// the subset mean, then a plain sum of squares.
double subset_objective(const Vector& p, const AnchorSet& s, const Vector& r,
                        const Vector& delta, const NetworkGeometry& geom);

// Global fit over one subset by Levenberg-Marquardt on the residuals
// (x, tau) from a grid of starts across the anchor bounding box.
struct SubsetFit {
  Vector position;
  double objective = 0.0;
};
SubsetFit fit_subset(const AnchorSet& s, const Vector& r, const Vector& delta,
                     const NetworkGeometry& geom, int grid = 4);

// Every subset of size `keep`, best first.
struct RankedSubset {
  AnchorSet set;
  SubsetFit fit;
};
std::vector<RankedSubset> exhaustive_subsets(const Vector& r, const Vector& delta,
                                             const NetworkGeometry& geom, int keep);

}  // namespace toa::oracle
