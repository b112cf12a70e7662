#include "dspp/qpsolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dspp {

void SolverConfig::validate() const {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw InputError("solver: eta must lie in (0, 1]");
  }
  if (!(exponent_cap > 0.0)) {
    throw InputError("solver: exponent cap must be positive");
  }
  if (refine_levels < 0 || !(refine_factor > 1.0)) {
    throw InputError("solver: invalid refinement schedule");
  }
}

namespace {

constexpr double kLogFloor = -690.7755278982137;  // log(1e-300)
constexpr double kRiseTol = 1e-10;                 // relative objective rise that counts as an overshoot
constexpr double kMinEtaScale = 1e-6;

// Runs the fixed-point iteration for one (eta, cap) pair, continuing `state`.
// The fixed point x ~ exp(-grad / alpha) does not depend on eta, so eta is
// halved whenever the objective rises: a step that overshoots the local
// curvature would otherwise settle into a 2-cycle.
void run_stage(const LinearMap& h, const VectorXd& c, const MarginalSpec& marginals, double eta, double cap,
               const SolverConfig& cfg, SolveResult& state) {
  const Index k = marginals.rows.size();
  const Index n = marginals.cols.size();
  double previous = std::numeric_limits<double>::infinity();
  for (Index it = 0; it < cfg.max_outer_iters; ++it) {
    const double eta_k = eta * state.trace.eta_scale;
    const VectorXd x = state.coupling.values.reshaped();
    const VectorXd grad = 2.0 * h(x) + c;
    const double gmax = grad.cwiseAbs().maxCoeff();
    if (!std::isfinite(gmax)) {
      throw SolverError("solve_quadratic: non-finite gradient");
    }
    if (gmax == 0.0) {
      state.trace.converged = true;
      state.trace.final_delta = 0.0;
      return;
    }
    const double alpha = gmax / cap;
    const MatrixXd log_kernel =
        (-eta_k / alpha) * grad.reshaped(k, n) + (1.0 - eta_k) * state.log_coupling.cwiseMax(kLogFloor);
    // log_kernel inherits the balanced scalings of x_k, so a cold Sinkhorn start is close.
    SinkhornResult next = kl_project(log_kernel, marginals, cfg.sinkhorn);

    const double delta = (next.coupling.values - state.coupling.values).cwiseAbs().maxCoeff();
    state.coupling = std::move(next.coupling);
    state.log_coupling = std::move(next.log_coupling);

    const VectorXd xn = state.coupling.values.reshaped();
    const double objective = xn.dot(h(xn)) + c.dot(xn);
    if (!std::isfinite(objective)) {
      throw SolverError("solve_quadratic: non-finite objective");
    }
    state.trace.objective.push_back(objective);
    state.trace.alpha.push_back(alpha);
    state.trace.max_marginal_error = std::max(state.trace.max_marginal_error, next.state.marginal_error);
    state.trace.final_delta = delta;
    ++state.trace.iterations;
    if (objective > previous + kRiseTol * std::max(1.0, std::abs(previous)) &&
        state.trace.eta_scale > kMinEtaScale) {
      state.trace.eta_scale *= 0.5;
      ++state.trace.step_reductions;
    }
    previous = objective;
    if (delta <= cfg.outer_tol) {
      state.trace.converged = true;
      return;
    }
  }
  state.trace.converged = false;
}

}  // namespace

SolveResult solve_quadratic(const LinearMap& h, const VectorXd& c, const MarginalSpec& marginals,
                            const Coupling& x_init, const SolverConfig& cfg) {
  cfg.validate();
  marginals.validate();
  const Index k = marginals.rows.size();
  const Index n = marginals.cols.size();
  if (x_init.values.rows() != k || x_init.values.cols() != n || c.size() != k * n) {
    throw DimensionError("solve_quadratic: initial coupling or linear term does not match the marginals");
  }
  if (!x_init.values.allFinite() || x_init.values.minCoeff() < 0.0) {
    throw InfeasibleError("solve_quadratic: initial coupling must be finite and nonnegative");
  }
  Coupling init{x_init.values, marginals};
  if (init.marginal_error() > 1e-6) {
    throw InfeasibleError("solve_quadratic: initial coupling violates the marginals (error " +
                          std::to_string(init.marginal_error()) + ")");
  }

  SolveResult state;
  state.coupling = std::move(init);
  state.log_coupling = state.coupling.values.array().max(1e-300).log();

  double eta = cfg.eta;
  double cap = cfg.exponent_cap;
  for (int level = 0; level <= cfg.refine_levels; ++level) {
    run_stage(h, c, marginals, eta, cap, cfg, state);
    eta /= cfg.refine_factor;
    cap *= cfg.refine_factor;
  }
  return state;
}

}  // namespace dspp
