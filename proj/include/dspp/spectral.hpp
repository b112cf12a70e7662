#pragma once

#include "dspp/core.hpp"

#include <cstdint>
#include <functional>

namespace dspp {

using LinearMap = std::function<VectorXd(const VectorXd&)>;

/// Orthogonal projector onto the direction space {U : U 1 = 0, 1^T U = 0}
/// of a coupling polytope with `rows` x `cols` variables. Applied in closed
/// form by double centering; the annihilated complement has dimension
/// rows + cols - 1.
class TangentProjector {
 public:
  TangentProjector(Index rows, Index cols) : rows_(rows), cols_(cols) {}
  explicit TangentProjector(Index n) : TangentProjector(n, n) {}

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index dim() const { return rows_ * cols_; }
  Index complement_dim() const { return rows_ + cols_ - 1; }

  template <typename Derived>
  VectorXd operator()(const Eigen::MatrixBase<Derived>& u) const {
    if (u.size() != dim()) {
      throw DimensionError("tangent projector: vector length does not match " +
                           std::to_string(rows_) + "x" + std::to_string(cols_));
    }
    VectorXd out = u;
    auto m = out.reshaped(rows_, cols_);
    const VectorXd row_means = m.rowwise().mean();
    const Eigen::RowVectorXd col_means = m.colwise().mean();
    const double mean = row_means.mean();
    m.colwise() -= row_means;
    m.rowwise() -= col_means;
    m.array() += mean;
    return out;
  }

 private:
  Index rows_;
  Index cols_;
};

/// Square-case projection of a stacked n x n matrix.
VectorXd project_ds_tangent(const VectorXd& u);

struct EigOptions {
  double tol = 1e-9;         // residual relative to |lambda|
  Index max_iters = 0;       // power iterations, 0 selects max(10 * dim, 2000); the Lanczos phase gets as many
  std::uint64_t seed = 0x5eed;
  double scale = 0.0;        // residual floor: converged when residual <= tol * max(|lambda|, scale)
  Index block = 4;           // iterate block size
};

struct EigResult {
  double lambda = 0.0;
  double residual = 0.0;
  Index iterations = 0;
  VectorXd vector;
};

/// Largest-magnitude eigenvalue of a symmetric operator by block power
/// iteration with a Rayleigh-Ritz step, which copes with clustered and
/// +-mu paired top eigenvalues. If the observed convergence rate is too slow
/// it switches to thick-restart Lanczos. When `projector` is given every
/// product is re-projected, so the result is the extreme eigenvalue of P op P
/// on Image(P). Throws ConvergenceError when both phases run out of budget.
EigResult max_magnitude_eig(const LinearMap& op, Index dim, const EigOptions& opts = {},
                            const LinearMap& projector = {});

struct EigRange {
  double lambda_bar_min = 0.0;
  double lambda_bar_max = 0.0;
  Index iterations_used = 0;
  double residual = 0.0;
};

/// Extreme eigenvalues of F^T W F, F an orthonormal basis of the polytope's
/// direction space, from two max-magnitude solves on P W P.
EigRange lambda_bar_range(const EnergySpec& e, const EigOptions& opts = {});

/// Minimal and maximal eigenvalue of W over the full space.
EigRange full_range(const EnergySpec& e, const EigOptions& opts = {});
double lambda_min_full(const EnergySpec& e, const EigOptions& opts = {});

/// Two-phase extreme eigenvalue search shared by the two routines above.
EigRange extreme_eigenvalues(const LinearMap& op, Index dim, const EigOptions& opts,
                             const LinearMap& projector = {});

}  // namespace dspp
