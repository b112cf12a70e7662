#pragma once

// Random instance generators shared by the unit tests and the acceptance
// runner. Everything is seeded so failures reproduce.

#include "dspp/core.hpp"
#include "dspp/energies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace dspp::testing {

using Rng = std::mt19937_64;

inline MatrixXd random_matrix(Index rows, Index cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  return MatrixXd::NullaryExpr(rows, cols, [&] { return u(rng); });
}

inline MatrixXd random_symmetric(Index dim, Rng& rng) {
  const MatrixXd a = random_matrix(dim, dim, rng);
  return 0.5 * (a + a.transpose());
}

/// G^T G, positive semidefinite.
inline MatrixXd random_psd(Index dim, Rng& rng) {
  const MatrixXd g = random_matrix(dim, dim, rng);
  return g.transpose() * g;
}

inline std::vector<int> random_permutation(int n, Rng& rng) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

/// Doubly stochastic matrix by alternating normalization of a random
/// positive matrix (converged to 1e-14).
inline MatrixXd random_doubly_stochastic(Index n, Rng& rng) {
  MatrixXd x = random_matrix(n, n, rng, 0.05, 1.0);
  for (int it = 0; it < 10000; ++it) {
    x.array().colwise() /= x.rowwise().sum().array();
    x.array().rowwise() /= x.colwise().sum().array();
    if ((x.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-14) break;
  }
  return x;
}

/// Uniform points in the unit cube of the given dimension.
inline MatrixXd random_points(Index count, Index dim, Rng& rng) { return random_matrix(count, dim, rng, 0.0, 1.0); }

/// Rows of `points` relabeled so that row i of the result is row perm[i]
/// of the input, optionally rotated in the plane and perturbed.
inline MatrixXd relabel(const MatrixXd& points, const std::vector<int>& perm, Rng& rng, double noise = 0.0,
                        double angle = 0.0) {
  std::normal_distribution<double> g(0.0, noise > 0.0 ? noise : 1.0);
  MatrixXd out(static_cast<Index>(perm.size()), points.cols());
  for (Index i = 0; i < out.rows(); ++i) {
    out.row(i) = points.row(perm[static_cast<std::size_t>(i)]);
  }
  if (angle != 0.0 && points.cols() >= 2) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const Eigen::VectorXd x = out.col(0);
    const Eigen::VectorXd y = out.col(1);
    out.col(0) = c * x - s * y;
    out.col(1) = s * x + c * y;
  }
  if (noise > 0.0) {
    out += MatrixXd::NullaryExpr(out.rows(), out.cols(), [&] { return g(rng); });
  }
  return out;
}

/// Euclidean distances between the rows of `points`.
inline MatrixXd point_distances(const MatrixXd& points) {
  const Index n = points.rows();
  MatrixXd d(n, n);
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) d(a, b) = (points.row(a) - points.row(b)).norm();
  }
  return d;
}

/// Source points and a relabeled, optionally perturbed copy as targets.
/// truth[i] is the target of source i.
struct Isometry {
  MetricData metric;
  std::vector<int> truth;
};

inline Isometry isometric_instance(Index n, Index dim, Rng& rng, double noise = 0.0) {
  const MatrixXd points = random_points(n, dim, rng);
  const std::vector<int> perm = random_permutation(static_cast<int>(n), rng);
  std::vector<int> truth(perm.size());
  for (std::size_t t = 0; t < perm.size(); ++t) truth[static_cast<std::size_t>(perm[t])] = static_cast<int>(t);
  return {{point_distances(points), point_distances(relabel(points, perm, rng, noise))}, truth};
}

/// Symmetric quadratic energy with a random dense W and no linear term.
inline EnergySpec random_energy(Index n, Rng& rng, bool convex = false) {
  const MatrixXd w = convex ? random_psd(n * n, rng) : random_symmetric(n * n, rng);
  return {n, n, QuadraticOperator::dense(w)};
}

}  // namespace dspp::testing
