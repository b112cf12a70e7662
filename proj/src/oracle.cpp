#include "dspp/oracle.hpp"

#include <cmath>
#include <limits>

namespace dspp {

std::uint64_t injection_count(Index k, Index n) {
  std::uint64_t count = 1;
  for (Index i = 0; i < k; ++i) {
    const auto f = static_cast<std::uint64_t>(n - i);
    if (count > std::numeric_limits<std::uint64_t>::max() / std::max<std::uint64_t>(f, 1)) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    count *= f;
  }
  return count;
}

namespace {

struct Search {
  const MatrixXd& w;
  const VectorXd& c;
  Index k;
  Index n;
  double tie_tol;
  std::vector<int> current;
  std::vector<Index> slots;  // stack index of each fixed row
  std::vector<char> used;
  BruteForceResult best;

  void run(Index row, double partial) {
    if (row == k) {
      ++best.enumerated;
      if (partial < best.value - tie_tol) {
        best.value = partial;
        best.assignment.targets = current;
      }
      return;
    }
    for (Index j = 0; j < n; ++j) {
      if (used[j]) continue;
      const Index q = stack_index(row, j, k);
      double delta = w(q, q) + c(q);
      for (Index r = 0; r < row; ++r) {
        delta += 2.0 * w(q, slots[r]);
      }
      used[j] = 1;
      current[row] = static_cast<int>(j);
      slots[row] = q;
      run(row + 1, partial + delta);
      used[j] = 0;
    }
  }
};

}  // namespace

BruteForceResult brute_force_injective(const EnergySpec& e) {
  const Index k = e.rows();
  const Index n = e.cols();
  const std::uint64_t count = injection_count(k, n);
  if (count > kBruteForceLimit) {
    throw InputError("brute force: " + std::to_string(k) + " x " + std::to_string(n) +
                     " has too many assignments to enumerate");
  }
  const MatrixXd w = e.quadratic().to_dense();
  const VectorXd c = e.has_linear_term() ? e.linear() : VectorXd::Zero(e.dim());
  const double scale = 1.0 + w.cwiseAbs().maxCoeff() * static_cast<double>(k * k) +
                       c.cwiseAbs().maxCoeff() * static_cast<double>(k);
  Search s{w, c, k, n, 1e-12 * scale, std::vector<int>(k), std::vector<Index>(k), std::vector<char>(n, 0), {}};
  s.best.value = std::numeric_limits<double>::infinity();
  s.run(0, 0.0);
  s.best.value += e.constant();
  return s.best;
}

BruteForceResult brute_force_min(const EnergySpec& e) {
  if (!e.square()) {
    throw DimensionError("brute_force_min: energy is not square");
  }
  return brute_force_injective(e);
}

MatrixXd marginal_constraint_matrix(Index k, Index n) {
  MatrixXd a = MatrixXd::Zero(k + n, k * n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < k; ++i) {
      a(i, stack_index(i, j, k)) = 1.0;
      a(k + j, stack_index(i, j, k)) = 1.0;
    }
  }
  return a;
}

MatrixXd tangent_basis(Index k, Index n) {
  const MatrixXd a = marginal_constraint_matrix(k, n);
  const Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeFullV);
  const Index rank = k + n - 1;
  return svd.matrixV().rightCols(k * n - rank);
}

DenseRange dense_subspace_eigs(const EnergySpec& e) {
  if (e.dim() > 100) {
    throw InputError("dense_subspace_eigs: problem too large for the dense oracle");
  }
  const MatrixXd f = tangent_basis(e.rows(), e.cols());
  if (f.cols() == 0) {
    return {};
  }
  const MatrixXd w = e.quadratic().to_dense();
  const MatrixXd reduced = f.transpose() * w * f;
  const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (reduced + reduced.transpose()),
                                                    Eigen::EigenvaluesOnly);
  return {eig.eigenvalues()(0), eig.eigenvalues()(f.cols() - 1)};
}

}  // namespace dspp
