#pragma once

#include <Eigen/Dense>

namespace toa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

bool all_finite(const Matrix& a);

// Singular values at or below rank_tol * max(sigma_max(a), scale) are treated
// as zero. rank_tol == 0 selects max(rows, cols) * machine epsilon.
//
// `scale` lets a caller supply the magnitude the matrix *should* be measured
// against. Without it a matrix that is pure round-off (e.g. A*Q where Q
// annihilates A up to 1e-16) is judged against its own noise floor and the
// noise gets inverted.
Matrix mp_pinv(const Matrix& a, double rank_tol = 0.0, double scale = 0.0);

// Solves a * x = b for symmetric positive definite a via Cholesky.
// Throws SingularityError if a is not (numerically) SPD.
Matrix spd_solve(const Matrix& a, const Matrix& b);

// I - c * pinv(c): orthogonal projector onto the complement of range(c).
Matrix complement_projector(const Matrix& c, double rank_tol = 0.0,
                            double scale = 0.0);

double default_rank_tol(Eigen::Index rows, Eigen::Index cols);

}  // namespace linalg
}  // namespace toa
