#pragma once

// Time-of-arrival measurement model: anchor geometry, the selection and
// centering operators that eliminate the unknown transmit time, and
// synthetic frame generation.
//
// Units: metres for coordinates, nanoseconds for all times.

#include <optional>
#include <random>
#include <vector>

#include "toa/anchor_set.hpp"
#include "toa/linalg.hpp"

namespace toa {

// Speed of light in m/ns.
inline constexpr double kSpeedOfLight = 0.299792458;

using Rng = std::mt19937_64;

struct NetworkGeometry {
  int dim = 3;
  Matrix anchors;  // dim x M, column m holds anchor m
  double c = kSpeedOfLight;

  int anchor_count() const noexcept { return static_cast<int>(anchors.cols()); }

  // Throws InvalidInput unless dim in {2,3}, M >= 2, c > 0 and all finite.
  void validate() const;
};

NetworkGeometry make_geometry(int dim, const std::vector<std::vector<double>>& anchors,
                              double c = kSpeedOfLight);

struct AgentTruth {
  Vector position;
  double tx_time = 0.0;      // ns
  AnchorSet los_set;
  Vector nlos_errors;        // ns, length M, zero exactly on los_set
};

struct ToaFrame {
  int t = 0;
  std::vector<Vector> measurements;  // one length-M vector per agent, ns
  std::optional<std::vector<AgentTruth>> truth;

  int agent_count() const noexcept { return static_cast<int>(measurements.size()); }
};

// |s| x m row-extraction operator.
Matrix selection_matrix(const AnchorSet& s, int m);

// I - (1/k) 1 1^T.
Matrix centering_matrix(int k);

// centering_matrix(|s|) * selection_matrix(s, m). Rows sum to zero.
Matrix reduced_row_matrix(const AnchorSet& s, int m);

// Euclidean anchor distances divided by c, in ns.
Vector distance_vector(const Vector& p, const NetworkGeometry& geom);

// r_m = |q_m - p| / c + tau + delta_m + b_m + noise, noise ~ N(0, sigma^2).
// Noise is drawn agent by agent, anchor by anchor from `rng`.
ToaFrame generate_frame(const NetworkGeometry& geom, const std::vector<AgentTruth>& agents,
                        const Vector& offsets, double sigma, Rng& rng, int t = 1);

// ceil(fraction * m) with a 1e-9 guard against representation error in the
// product (0.12 * 25 must give 3, 0.88 * 25 must give 22).
int ceil_count(double fraction, int m);

}  // namespace toa
