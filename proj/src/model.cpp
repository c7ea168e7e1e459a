#include "toa/model.hpp"

#include <cmath>
#include <string>

#include "toa/errors.hpp"

namespace toa {

void NetworkGeometry::validate() const {
  if (dim != 2 && dim != 3) throw InvalidInput("geometry: dim must be 2 or 3");
  if (anchors.rows() != dim) throw InvalidInput("geometry: anchor rows must equal dim");
  if (anchors.cols() < 2) throw InvalidInput("geometry: need at least 2 anchors");
  if (!anchors.allFinite()) throw InvalidInput("geometry: non-finite anchor coordinate");
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidInput("geometry: c must be positive");
}

NetworkGeometry make_geometry(int dim, const std::vector<std::vector<double>>& anchors,
                              double c) {
  NetworkGeometry g;
  g.dim = dim;
  g.c = c;
  g.anchors.resize(dim, static_cast<Eigen::Index>(anchors.size()));
  for (std::size_t m = 0; m < anchors.size(); ++m) {
    if (static_cast<int>(anchors[m].size()) != dim) {
      throw InvalidInput("geometry: anchor " + std::to_string(m) + " has wrong dimension");
    }
    for (int k = 0; k < dim; ++k) g.anchors(k, static_cast<Eigen::Index>(m)) = anchors[m][k];
  }
  g.validate();
  return g;
}

namespace {

void check_subset(const AnchorSet& s, int m) {
  if (s.empty()) throw InvalidInput("anchor subset must be nonempty");
  if (s[s.size() - 1] >= m) throw InvalidInput("anchor subset index out of range");
}

}  // namespace

Matrix selection_matrix(const AnchorSet& s, int m) {
  check_subset(s, m);
  Matrix f = Matrix::Zero(s.size(), m);
  for (int i = 0; i < s.size(); ++i) f(i, s[i]) = 1.0;
  return f;
}

Matrix centering_matrix(int k) {
  if (k < 1) throw InvalidInput("centering_matrix: k must be >= 1");
  Matrix b = Matrix::Identity(k, k);
  b.array() -= 1.0 / k;
  return b;
}

Matrix reduced_row_matrix(const AnchorSet& s, int m) {
  check_subset(s, m);
  // B(k) F(s) written out directly: row i has 1 - 1/k at s_i and -1/k at the
  // other selected columns.
  const int k = s.size();
  Matrix a = Matrix::Zero(k, m);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) a(i, s[j]) = (i == j ? 1.0 : 0.0) - 1.0 / k;
  }
  return a;
}

Vector distance_vector(const Vector& p, const NetworkGeometry& geom) {
  if (p.size() != geom.dim) throw InvalidInput("distance_vector: dimension mismatch");
  if (!p.allFinite()) throw InvalidInput("distance_vector: non-finite position");
  return (geom.anchors.colwise() - p).colwise().norm().transpose() / geom.c;
}

ToaFrame generate_frame(const NetworkGeometry& geom, const std::vector<AgentTruth>& agents,
                        const Vector& offsets, double sigma, Rng& rng, int t) {
  const int m = geom.anchor_count();
  if (offsets.size() != m) throw InvalidInput("generate_frame: offsets length != M");
  if (!(sigma >= 0.0)) throw InvalidInput("generate_frame: sigma must be >= 0");

  std::normal_distribution<double> noise(0.0, 1.0);
  ToaFrame frame;
  frame.t = t;
  frame.measurements.reserve(agents.size());
  for (const auto& agent : agents) {
    if (agent.nlos_errors.size() != m) {
      throw InvalidInput("generate_frame: nlos_errors length != M");
    }
    Vector r = distance_vector(agent.position, geom);
    for (int k = 0; k < m; ++k) {
      // Transmit time and offset enter as a single sum so that the gauge
      // (offsets + kappa, tx_time - kappa) yields identical measurements
      // whenever that sum is exact.
      r(k) += (agent.tx_time + offsets(k)) + agent.nlos_errors(k) + sigma * noise(rng);
    }
    frame.measurements.push_back(std::move(r));
  }
  frame.truth = agents;
  return frame;
}

int ceil_count(double fraction, int m) {
  return static_cast<int>(std::ceil(fraction * m - 1e-9));
}

}  // namespace toa
