#pragma once

#include "dspp/core.hpp"
#include "dspp/sinkhorn.hpp"
#include "dspp/spectral.hpp"

#include <vector>

namespace dspp {

/// Parameters of the entropic mirror-descent QP solver.
struct SolverConfig {
  double eta = 0.01;            // weight of the linearized energy against the proximal KL term
  double exponent_cap = 100.0;  // alpha_k is the smallest value keeping |exponent| <= cap
  double outer_tol = 1e-7;      // stop once ||x_{k+1} - x_k||_inf <= outer_tol
  Index max_outer_iters = 5000;
  SinkhornOptions sinkhorn{};
  /// Extra continuation rounds after convergence. Each round scales the
  /// cap up and eta down by `refine_factor`, which keeps the per-iteration
  /// step eta * cap fixed while shrinking the entropic smoothing.
  int refine_levels = 0;
  double refine_factor = 10.0;

  void validate() const;
};

struct SolveTrace {
  std::vector<double> objective;  // f(x_k) after every outer iteration
  std::vector<double> alpha;      // alpha_k used to produce x_k
  double final_delta = 0.0;
  double max_marginal_error = 0.0;
  Index iterations = 0;
  bool converged = false;
  double eta_scale = 1.0;      // eta in use relative to the configured one
  Index step_reductions = 0;   // times eta was halved after the objective rose
};

struct SolveResult {
  Coupling coupling;
  MatrixXd log_coupling;
  SolveTrace trace;
};

/// Locally minimizes f(x) = x^T H x + c^T x over the coupling polytope of
/// `marginals`, starting from x_init. Every iterate is the KL projection of
///
///   exp(-eta / alpha_k * (2 H x_k + c)) .* x_k^(1 - eta),
///
/// alpha_k = ||2 H x_k + c||_inf / exponent_cap. Zero entries of x_init are
/// floored to 1e-300. eta is halved whenever f(x_k) rises, which leaves the
/// fixed points unchanged.
SolveResult solve_quadratic(const LinearMap& h, const VectorXd& c, const MarginalSpec& marginals,
                            const Coupling& x_init, const SolverConfig& cfg = {});

}  // namespace dspp
