#include "toa/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "toa/errors.hpp"

namespace toa::linalg {

bool all_finite(const Matrix& a) { return a.allFinite(); }

double default_rank_tol(Eigen::Index rows, Eigen::Index cols) {
  return static_cast<double>(std::max(rows, cols)) *
         std::numeric_limits<double>::epsilon();
}

Matrix mp_pinv(const Matrix& a, double rank_tol, double scale) {
  if (!a.allFinite()) throw InvalidInput("mp_pinv: non-finite input");
  if (!(rank_tol >= 0.0) || !(scale >= 0.0) || !std::isfinite(scale)) {
    throw InvalidInput("mp_pinv: rank_tol and scale must be finite and >= 0");
  }
  if (a.size() == 0) return Matrix::Zero(a.cols(), a.rows());

  const double tol = rank_tol > 0.0 ? rank_tol : default_rank_tol(a.rows(), a.cols());
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double sigma_max = s.size() > 0 ? s(0) : 0.0;
  const double cutoff = tol * std::max(sigma_max, scale);

  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > cutoff) ++rank;
  if (rank == 0) return Matrix::Zero(a.cols(), a.rows());

  const Vector inv = s.head(rank).cwiseInverse();
  return svd.matrixV().leftCols(rank) * inv.asDiagonal() *
         svd.matrixU().leftCols(rank).transpose();
}

Matrix spd_solve(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || a.rows() != b.rows()) {
    throw InvalidInput("spd_solve: shape mismatch");
  }
  if (!a.allFinite() || !b.allFinite()) throw InvalidInput("spd_solve: non-finite input");
  const double norm = a.cwiseAbs().maxCoeff();
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(norm, 1.0)) {
    throw InvalidInput("spd_solve: matrix is not symmetric");
  }
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw SingularityError("spd_solve: matrix is not positive definite");
  }
  Matrix x = llt.solve(b);
  if (!x.allFinite()) throw SingularityError("spd_solve: solution is not finite");
  return x;
}

Matrix complement_projector(const Matrix& c, double rank_tol, double scale) {
  Matrix p = Matrix::Identity(c.rows(), c.rows());
  p.noalias() -= c * mp_pinv(c, rank_tol, scale);
  return p;
}

}  // namespace toa::linalg
