#include "toa/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "toa/errors.hpp"

namespace toa::oracle {

Vector weighted_min_norm(const std::vector<MeasurementBlock>& blocks, double lambda) {
  if (blocks.empty()) throw InvalidInput("weighted_min_norm: no blocks");
  const auto t = static_cast<int>(blocks.size());
  const Eigen::Index m = blocks.front().a_block.cols();
  Eigen::Index rows = 0;
  for (const auto& b : blocks) rows += b.a_block.rows();

  Matrix a(rows, m);
  Vector y(rows);
  Eigen::Index row = 0;
  for (int u = 0; u < t; ++u) {
    const auto& b = blocks[static_cast<std::size_t>(u)];
    // lambda^-(u+1) times lambda^t.
    double w = 1.0;
    for (int k = u + 1; k < t; ++k) w *= lambda;
    a.middleRows(row, b.rows()) = w * b.a_block;
    y.segment(row, b.rows()) = w * b.y_block;
    row += b.rows();
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
  cod.setThreshold(1e-10);
  cod.compute(a);
  return cod.solve(y);
}

double PenroseResiduals::max() const { return std::max({axa, xax, ax_sym, xa_sym}); }

namespace {

double rel(const Matrix& diff, const Matrix& ref) {
  const double n = ref.norm();
  return diff.norm() / (n > 0.0 ? n : 1.0);
}

}  // namespace

PenroseResiduals penrose(const Matrix& a, const Matrix& x) {
  PenroseResiduals out;
  const Matrix ax = a * x;
  const Matrix xa = x * a;
  out.axa = rel(ax * a - a, a);
  out.xax = rel(xa * x - x, x);
  out.ax_sym = rel(ax - ax.transpose(), ax);
  out.xa_sym = rel(xa - xa.transpose(), xa);
  return out;
}

Vector central_difference(const std::function<double(const Vector&)>& f, const Vector& p,
                          double h) {
  Vector g(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    Vector hi = p;
    Vector lo = p;
    hi(i) += h;
    lo(i) -= h;
    g(i) = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

double subset_objective(const Vector& p, const AnchorSet& s, const Vector& r,
                        const Vector& delta, const NetworkGeometry& geom) {
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(s.size()));
  for (int m : s) {
    const double rho = (geom.anchors.col(m) - p).norm();
    w.push_back(r(m) - rho / geom.c - delta(m));
  }
  double tau = 0.0;
  for (double v : w) tau += v;
  tau /= static_cast<double>(w.size());
  double f = 0.0;
  for (double v : w) f += (v - tau) * (v - tau);
  return f;
}

namespace {

// Residuals r - rho/c - delta - tau over s, and their Jacobian in (p, tau).
void residuals(const Vector& x, const AnchorSet& s, const Vector& r, const Vector& delta,
               const NetworkGeometry& geom, Vector& res, Matrix& jac) {
  const int dim = geom.dim;
  res.resize(s.size());
  jac.resize(s.size(), dim + 1);
  const Vector p = x.head(dim);
  const double tau = x(dim);
  for (int i = 0; i < s.size(); ++i) {
    const int m = s[i];
    const Vector diff = p - geom.anchors.col(m);
    const double rho = std::max(diff.norm(), 1e-12);
    res(i) = r(m) - rho / geom.c - delta(m) - tau;
    jac.row(i).head(dim) = -diff.transpose() / (geom.c * rho);
    jac(i, dim) = -1.0;
  }
}

SubsetFit levenberg_marquardt(const Vector& p0, const AnchorSet& s, const Vector& r,
                              const Vector& delta, const NetworkGeometry& geom) {
  const int dim = geom.dim;
  Vector x(dim + 1);
  x.head(dim) = p0;
  Vector res;
  Matrix jac;
  residuals(x, s, r, delta, geom, res, jac);
  // Optimal tau for the start point.
  x(dim) += res.mean();
  residuals(x, s, r, delta, geom, res, jac);
  double cost = res.squaredNorm();
  double mu = 1e-3;
  for (int it = 0; it < 300; ++it) {
    const Matrix jtj = jac.transpose() * jac;
    const Vector jtr = jac.transpose() * res;
    Matrix lhs = jtj;
    lhs.diagonal() += mu * (jtj.diagonal().array() + 1e-12).matrix();
    const Vector step = -lhs.ldlt().solve(jtr);
    Vector xn = x + step;
    Vector rn;
    Matrix jn;
    residuals(xn, s, r, delta, geom, rn, jn);
    const double cn = rn.squaredNorm();
    if (cn < cost) {
      const bool small = step.norm() < 1e-13 * (1.0 + x.norm()) || cost - cn < 1e-30;
      x = xn;
      res = rn;
      jac = jn;
      cost = cn;
      mu = std::max(mu / 3.0, 1e-12);
      if (small) break;
    } else {
      mu *= 4.0;
      if (mu > 1e12) break;
    }
  }
  return {x.head(dim), cost};
}

}  // namespace

SubsetFit fit_subset(const AnchorSet& s, const Vector& r, const Vector& delta,
                     const NetworkGeometry& geom, int grid) {
  if (s.size() < geom.dim + 2) throw InvalidInput("fit_subset: subset too small");
  const Vector lo = geom.anchors.rowwise().minCoeff();
  const Vector hi = geom.anchors.rowwise().maxCoeff();
  const int dim = geom.dim;
  int total = 1;
  for (int d = 0; d < dim; ++d) total *= grid;

  SubsetFit best;
  best.objective = std::numeric_limits<double>::infinity();
  for (int k = 0; k < total; ++k) {
    Vector p0(dim);
    int rem = k;
    for (int d = 0; d < dim; ++d) {
      const int g = rem % grid;
      rem /= grid;
      p0(d) = lo(d) + (hi(d) - lo(d)) * (g + 0.5) / grid;
    }
    const SubsetFit fit = levenberg_marquardt(p0, s, r, delta, geom);
    if (fit.objective < best.objective) best = fit;
  }
  return best;
}

std::vector<RankedSubset> exhaustive_subsets(const Vector& r, const Vector& delta,
                                             const NetworkGeometry& geom, int keep) {
  const int m = geom.anchor_count();
  if (keep < geom.dim + 2 || keep > m) throw InvalidInput("exhaustive_subsets: bad keep");
  std::vector<RankedSubset> out;
  std::vector<bool> mask(static_cast<std::size_t>(m), false);
  std::fill(mask.begin(), mask.begin() + keep, true);
  do {
    std::vector<int> idx;
    for (int i = 0; i < m; ++i) {
      if (mask[static_cast<std::size_t>(i)]) idx.push_back(i);
    }
    RankedSubset rs;
    rs.set = AnchorSet::from_sorted(idx, m);
    rs.fit = fit_subset(rs.set, r, delta, geom);
    out.push_back(std::move(rs));
  } while (std::prev_permutation(mask.begin(), mask.end()));
  std::stable_sort(out.begin(), out.end(), [](const RankedSubset& a, const RankedSubset& b) {
    return a.fit.objective < b.fit.objective;
  });
  return out;
}

}  // namespace toa::oracle
