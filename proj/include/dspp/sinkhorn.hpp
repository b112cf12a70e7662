#pragma once

#include "dspp/core.hpp"

#include <vector>

namespace dspp {

struct SinkhornOptions {
  double tol = 1e-9;
  Index max_iters = 10000;
  bool record_history = false;
  /// Switch to Newton steps on the dual after this many sweeps (0 = never).
  Index newton_after = 100;
};

/// Log-scalings of a converged (or abandoned) Sinkhorn run.
struct ScalingState {
  VectorXd log_u;
  VectorXd log_v;
  Index iterations = 0;
  double marginal_error = 0.0;
};

struct SinkhornResult {
  Coupling coupling;
  /// log_kernel + log_u 1^T + 1 log_v^T, exact even where the coupling underflows.
  MatrixXd log_coupling;
  ScalingState state;
  /// Column marginal error after each row/column sweep, when requested.
  std::vector<double> history;
};

/// KL projection of exp(log_kernel) onto the polytope of couplings with the
/// given marginals (Sinkhorn matrix scaling). Scalings are kept as
/// logarithms and absorbed into the kernel whenever they leave a safe range,
/// so kernels spanning hundreds of orders of magnitude are handled.
///
/// Throws InfeasibleError for inconsistent marginals or an all -inf line,
/// InputError for NaN/+inf kernel entries and ConvergenceError when the
/// marginal error is still above tol after max_iters sweeps.
SinkhornResult kl_project(const MatrixXd& log_kernel, const MarginalSpec& marginals,
                          const SinkhornOptions& opts = {}, const ScalingState* warm_start = nullptr);

/// KL(x | y) = <x, log x> - <x, log y> for nonnegative x, positive y
/// (given by its logarithm). Zero entries of x contribute nothing.
double kl_divergence(const MatrixXd& x, const MatrixXd& log_y);

}  // namespace dspp
