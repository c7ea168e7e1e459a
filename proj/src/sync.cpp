#include "toa/sync.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "toa/errors.hpp"

namespace toa {

SyncState init_sync(int m, double lambda) {
  if (m < 2) throw InvalidInput("init_sync: need at least 2 anchors");
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw InvalidInput("init_sync: lambda must lie in (0, 1]");
  }
  SyncState s;
  s.m = m;
  s.lambda = lambda;
  s.t = 0;
  s.delta_hat = Vector::Zero(m);
  s.q_mat = Matrix::Identity(m, m);
  s.r_mat = Matrix::Zero(m, m);
  return s;
}

MeasurementBlock assemble_block(const ToaFrame& frame, const std::vector<AnchorSet>& selections,
                                const std::vector<Vector>& positions,
                                const NetworkGeometry& geom) {
  const int n_agents = frame.agent_count();
  const int m = geom.anchor_count();
  if (static_cast<int>(selections.size()) != n_agents ||
      static_cast<int>(positions.size()) != n_agents) {
    throw InvalidInput("assemble_block: selection/position count does not match frame");
  }
  int rows = 0;
  for (const auto& s : selections) {
    if (s.empty()) throw InvalidInput("assemble_block: empty selection");
    rows += s.size();
  }

  MeasurementBlock block;
  block.a_block = Matrix::Zero(rows, m);
  block.y_block.resize(rows);
  block.row_sets = selections;
  int row = 0;
  for (int n = 0; n < n_agents; ++n) {
    const AnchorSet& s = selections[static_cast<std::size_t>(n)];
    const Vector& r = frame.measurements[static_cast<std::size_t>(n)];
    if (r.size() != m) throw InvalidInput("assemble_block: measurement length != M");
    const Vector& p = positions[static_cast<std::size_t>(n)];
    if (!p.allFinite()) throw InvalidInput("assemble_block: non-finite position");
    const Matrix a = reduced_row_matrix(s, m);
    const Vector resid = r - distance_vector(p, geom);
    block.a_block.middleRows(row, s.size()) = a;
    block.y_block.segment(row, s.size()) = a * resid;
    row += s.size();
  }
  return block;
}

bool reduced_update_applies(const std::vector<AnchorSet>& selections, const SyncState& state) {
  if (selections.empty()) return false;
  for (const auto& s : selections) {
    if (2 * s.size() <= state.m) return false;
    if (!s.is_subset_of(state.covered_set)) return false;
  }
  return true;
}

namespace {

void check_block(const SyncState& state, const MeasurementBlock& block) {
  if (block.a_block.cols() != state.m) {
    throw InvalidInput("brmp update: block column count != M");
  }
  if (block.rows() == 0) throw InvalidInput("brmp update: empty block");
  if (block.y_block.size() != block.rows()) {
    throw InvalidInput("brmp update: y length != block rows");
  }
}

void finish_update(SyncState& next, const SyncState& prev, const MeasurementBlock& block,
                   const Matrix& gain) {
  const Matrix& a = block.a_block;
  const Vector innovation = block.y_block - a * prev.delta_hat;
  next.delta_hat = prev.delta_hat + gain * innovation;

  const Matrix ga = gain * a;
  next.q_mat = prev.q_mat - ga * prev.q_mat;

  const Matrix i_ga = Matrix::Identity(prev.m, prev.m) - ga;
  Matrix r = i_ga * prev.r_mat * i_ga.transpose();
  r.noalias() += gain * gain.transpose();
  r /= prev.lambda * prev.lambda;
  // R_t lives on the row space of the stacked system, range(I - Q_t). Blocks
  // never touch the null space, so round-off there is only ever scaled by
  // 1/lambda^2 and would grow without bound; project it out.
  const Matrix row_proj = Matrix::Identity(prev.m, prev.m) - next.q_mat;
  r = row_proj * r * row_proj.transpose();
  next.r_mat = 0.5 * (r + r.transpose());
  next.t = prev.t + 1;
}

}  // namespace

SyncState brmp_update_full(const SyncState& state, const MeasurementBlock& block,
                           double rank_tol, FullUpdateDiagnostics* diag) {
  check_block(state, block);
  const Matrix& a = block.a_block;
  const Eigen::Index rows = a.rows();
  const double scale = a.norm();

  const Matrix c = a * state.q_mat;
  const Matrix c_pinv = linalg::mp_pinv(c, rank_tol, scale);
  const Matrix proj = linalg::complement_projector(c, rank_tol, scale);

  const Matrix ar = a * state.r_mat;
  Matrix k_arg = Matrix::Identity(rows, rows);
  k_arg.noalias() += proj * ar * a.transpose() * proj;
  k_arg = (0.5 * (k_arg + k_arg.transpose())).eval();

  Matrix k;
  try {
    k = linalg::spd_solve(k_arg, Matrix::Identity(rows, rows));
  } catch (const SingularityError& e) {
    throw NumericalFailure(std::string("full BRMP update: ") + e.what(), state.t + 1);
  }

  Matrix v = Matrix::Identity(state.m, state.m) - c_pinv * a;
  v = v * ar.transpose() * k * proj;
  const Matrix gain = c_pinv + v;

  if (diag != nullptr) {
    diag->c_max_abs = c.size() ? c.cwiseAbs().maxCoeff() : 0.0;
    // rank(C) = trace(C C^+) for the projector C C^+.
    diag->c_rank = static_cast<int>(std::lround(static_cast<double>(rows) - proj.trace()));
  }

  SyncState next = state;
  finish_update(next, state, block, gain);
  if (!next.delta_hat.allFinite()) {
    throw NumericalFailure("full BRMP update produced non-finite estimate", next.t);
  }
  return next;
}

SyncState brmp_update_reduced(const SyncState& state, const MeasurementBlock& block) {
  check_block(state, block);
  const Matrix& a = block.a_block;
  const Eigen::Index rows = a.rows();

  const Matrix ra_t = state.r_mat * a.transpose();
  Matrix k_arg = Matrix::Identity(rows, rows);
  k_arg.noalias() += a * ra_t;
  k_arg = (0.5 * (k_arg + k_arg.transpose())).eval();

  Matrix k;
  try {
    k = linalg::spd_solve(k_arg, Matrix::Identity(rows, rows));
  } catch (const SingularityError& e) {
    throw NumericalFailure(std::string("reduced BRMP update: ") + e.what(), state.t + 1);
  }
  const Matrix gain = ra_t * k;

  SyncState next = state;
  finish_update(next, state, block, gain);
  if (!next.delta_hat.allFinite()) {
    throw NumericalFailure("reduced BRMP update produced non-finite estimate", next.t);
  }
  return next;
}

Vector direct_lls_solve(const std::vector<MeasurementBlock>& blocks, double lambda,
                        double rank_tol) {
  if (blocks.empty()) throw InvalidInput("direct_lls_solve: no blocks");
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw InvalidInput("direct_lls_solve: lambda must lie in (0, 1]");
  }
  const auto t = static_cast<int>(blocks.size());
  const double oldest = std::pow(lambda, t - 1);
  if (!(oldest >= std::numeric_limits<double>::min())) {
    throw RangeError("direct_lls_solve: row scaling underflows at t = " + std::to_string(t));
  }

  const Eigen::Index m = blocks.front().a_block.cols();
  Eigen::Index rows = 0;
  for (const auto& b : blocks) {
    if (b.a_block.cols() != m) throw InvalidInput("direct_lls_solve: inconsistent column count");
    rows += b.a_block.rows();
  }
  Matrix a(rows, m);
  Vector y(rows);
  Eigen::Index row = 0;
  for (int u = 0; u < t; ++u) {
    const auto& b = blocks[static_cast<std::size_t>(u)];
    const double w = std::pow(lambda, t - 1 - u);
    a.middleRows(row, b.rows()) = w * b.a_block;
    y.segment(row, b.rows()) = w * b.y_block;
    row += b.rows();
  }
  return linalg::mp_pinv(a, rank_tol) * y;
}

}  // namespace toa
