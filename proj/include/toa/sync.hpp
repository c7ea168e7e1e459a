#pragma once

// Blockwise recursive Moore-Penrose (BRMP) least squares for the anchor
// clock offsets.
//
// Each time step contributes a block A_t (rows of centered selection
// operators, one group per agent) and y_t. The recursion tracks the
// minimum-norm solution of the exponentially weighted stacked system
//
//   [ A_1 / lambda; A_2 / lambda^2; ...; A_t / lambda^t ] delta
//     ~= [ y_1 / lambda; ...; y_t / lambda^t ]
//
// in constant memory. Q_t is the projector onto the null space of the
// stacked matrix and R_t the (rescaled) inverse information on its row
// space.

#include <vector>

#include "toa/anchor_set.hpp"
#include "toa/linalg.hpp"
#include "toa/model.hpp"

namespace toa {

// Rank tolerance used for C_t and its projector, relative to ||A_t||_F.
inline constexpr double kSyncRankTol = 1e-10;

struct SyncState {
  int m = 0;
  double lambda = 1.0;
  int t = 0;
  Vector delta_hat;
  Matrix q_mat;
  Matrix r_mat;
  AnchorSet covered_set;
};

struct MeasurementBlock {
  Matrix a_block;  // M_t x M
  Vector y_block;  // M_t
  std::vector<AnchorSet> row_sets;

  int rows() const noexcept { return static_cast<int>(a_block.rows()); }
};

// Diagnostics filled in by brmp_update_full.
struct FullUpdateDiagnostics {
  double c_max_abs = 0.0;  // max |(A_t Q_{t-1})_ij|
  int c_rank = 0;          // numerical rank of C_t at the tolerance used
};

SyncState init_sync(int m, double lambda);

// Stacks y_{t,n} = B(S_n) F(S_n) (r_n - d(p_n)) and the matching rows of A
// in agent order.
MeasurementBlock assemble_block(const ToaFrame& frame, const std::vector<AnchorSet>& selections,
                                const std::vector<Vector>& positions,
                                const NetworkGeometry& geom);

// True iff every selection holds more than M/2 anchors and their union is
// already covered by earlier blocks. Under this condition A_t Q_{t-1} = 0 and
// the reduced update is exact.
bool reduced_update_applies(const std::vector<AnchorSet>& selections, const SyncState& state);

// General update, valid for any block including ones that open new
// directions in the row space.
SyncState brmp_update_full(const SyncState& state, const MeasurementBlock& block,
                           double rank_tol = kSyncRankTol,
                           FullUpdateDiagnostics* diag = nullptr);

// Update for blocks whose row space is already covered (C_t = 0).
// Does not re-check the precondition.
SyncState brmp_update_reduced(const SyncState& state, const MeasurementBlock& block);

// Batch oracle: min-norm LS solution of the full weighted stack via one
// pseudoinverse. Rows of block u are scaled by lambda^(t-u), which is the
// lambda^-u stacking multiplied through by lambda^t (same minimiser, no
// overflow). Throws RangeError if the oldest scale underflows.
Vector direct_lls_solve(const std::vector<MeasurementBlock>& blocks, double lambda,
                        double rank_tol = 0.0);

}  // namespace toa
