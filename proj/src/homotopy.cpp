#include "dspp/homotopy.hpp"

#include "dspp/projection.hpp"

#include <cmath>
#include <limits>

namespace dspp {

Problem Problem::permutation(const EnergySpec& e) {
  if (!e.square()) {
    throw DimensionError("problem: permutation problems need a square energy, got " + std::to_string(e.rows()) +
                         "x" + std::to_string(e.cols()));
  }
  return {e, MarginalSpec::doubly_stochastic(e.rows()), 0};
}

MatrixXd Problem::vertex(const Assignment& a) const {
  if (static_cast<Index>(a.size()) != matched_rows() || !a.is_injective(energy.cols())) {
    throw DimensionError("problem: assignment does not match the problem size");
  }
  MatrixXd x = MatrixXd::Zero(energy.rows(), energy.cols());
  std::vector<char> used(energy.cols(), 0);
  for (Index i = 0; i < matched_rows(); ++i) {
    x(slack_rows + i, a.targets[i]) = 1.0;
    used[a.targets[i]] = 1;
  }
  // Hand the free columns to the slack rows in order, filling each to its marginal.
  Index row = 0;
  double room = slack_rows > 0 ? marginals.rows(0) : 0.0;
  for (Index j = 0; j < energy.cols() && slack_rows > 0; ++j) {
    if (used[j]) continue;
    while (room < 0.5 && row + 1 < slack_rows) {
      room = marginals.rows(++row);
    }
    x(row, j) = 1.0;
    room -= 1.0;
  }
  return x;
}

Assignment Problem::project(const MatrixXd& x) const {
  if (slack_rows == 0) {
    return l2_project(x);
  }
  // <X, V> over vertices V: a free column j earns the slack mass of column j
  // instead, so matching it costs that mass.
  const VectorXd slack = x.topRows(slack_rows).colwise().sum().transpose();
  MatrixXd gain = x.bottomRows(matched_rows());
  gain.rowwise() -= slack.transpose();
  return l2_project(gain);
}

void HomotopyConfig::validate() const {
  if (num_samples < 1) {
    throw InputError("homotopy: at least one sample is required");
  }
  if (a_lo && a_hi && *a_lo > *a_hi) {
    throw InputError("homotopy: a_lo exceeds a_hi");
  }
  if (bound_refine_levels < 0) {
    throw InputError("homotopy: bound_refine_levels must be nonnegative");
  }
  solver.validate();
}

std::vector<double> homotopy_samples(double lo, double hi, int count) {
  if (count < 1 || lo > hi) {
    throw InputError("homotopy_samples: need count >= 1 and lo <= hi");
  }
  if (lo == hi || count == 1) {
    return {lo};
  }
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  out.back() = hi;
  return out;
}

namespace {

double integrality(const MatrixXd& x) { return x.cwiseMin((1.0 - x.array()).matrix()).cwiseAbs().maxCoeff(); }

// min <g, Y> over the polytope when it is an assignment polytope in
// disguise: integral row marginals, unit column marginals.
double linear_minimum(const MatrixXd& g, const MarginalSpec& m) {
  if ((m.cols.array() - 1.0).abs().maxCoeff() > 1e-12) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  std::vector<Index> rows;
  for (Index i = 0; i < m.rows.size(); ++i) {
    const double r = std::round(m.rows(i));
    if (std::abs(r - m.rows(i)) > 1e-12) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    rows.insert(rows.end(), static_cast<std::size_t>(r), i);
  }
  MatrixXd expanded(static_cast<Index>(rows.size()), g.cols());
  for (Index r = 0; r < expanded.rows(); ++r) {
    expanded.row(r) = g.row(rows[r]);
  }
  return solve_assignment(expanded).cost;
}

}  // namespace

double dual_bound(const Problem& p, double a, const Coupling& x) {
  const EnergySpec& e = p.energy;
  const VectorXd v = x.stacked();
  const VectorXd grad = 2.0 * (e.quadratic().apply(v) - a * v) + e.linear();
  return eval_shifted(e, v, a, p.mass()) - grad.dot(v) +
         linear_minimum(grad.reshaped(e.rows(), e.cols()), p.marginals);
}

RelaxResult relax_at(const Problem& p, double a, const SolverConfig& cfg, const Coupling* init) {
  const EnergySpec& e = p.energy;
  const QuadraticOperator& w = e.quadratic();
  const LinearMap h = [&w, a](const VectorXd& x) { return VectorXd(w.apply(x) - a * x); };
  const Coupling start = init ? *init : Coupling::uniform(p.marginals);
  SolveResult solved = solve_quadratic(h, e.linear(), p.marginals, start, cfg);

  RelaxResult out;
  out.shift = a;
  out.coupling = std::move(solved.coupling);
  out.trace = std::move(solved.trace);
  out.objective = eval_shifted(e, out.coupling.stacked(), a, p.mass());
  out.dual_bound = dual_bound(p, a, out.coupling);
  return out;
}

RelaxResult relax_convex(const Problem& p, const HomotopyConfig& cfg) {
  cfg.validate();
  const EigRange range = lambda_bar_range(p.energy, cfg.eig);
  SolverConfig solver = cfg.solver;
  solver.refine_levels = std::max(solver.refine_levels, cfg.bound_refine_levels);
  return relax_at(p, range.lambda_bar_min, solver, nullptr);
}

namespace {

HomotopyResult run_path(const Problem& p, const HomotopyConfig& cfg, const EigRange& range, double lo, double hi) {
  HomotopyResult out;
  out.range = range;
  const std::vector<double> samples = homotopy_samples(lo, hi, cfg.num_samples);
  SolverConfig convex_solver = cfg.solver;
  convex_solver.refine_levels = std::max(convex_solver.refine_levels, cfg.bound_refine_levels);

  Coupling current = Coupling::uniform(p.marginals);
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const double a = samples[s];
    StageTrace stage;
    stage.a = a;
    stage.initial_objective = eval_shifted(p.energy, current.stacked(), a, p.mass());
    RelaxResult r = relax_at(p, a, s == 0 ? convex_solver : cfg.solver, &current);
    stage.final_objective = r.objective;
    stage.iterations = r.trace.iterations;
    stage.converged = r.trace.converged;
    stage.integrality = integrality(r.coupling.values);
    out.stages.push_back(stage);
    current = std::move(r.coupling);
    if (s == 0) {
      out.convex = current;
      out.lower_bound = stage.final_objective;
    }
  }
  out.relaxed = std::move(current);
  return out;
}

}  // namespace

namespace {

// Final couplings farther than this from {0, 1} are treated as stuck on a
// stationary point of the concave end.
constexpr double kStalledIntegrality = 0.1;
constexpr Index kEscapeDirections = 9;

// Re-solves the last stage from the stalled coupling pushed both ways along
// the leading curvature directions, and keeps the best vertex.
void escape_stationary_point(const Problem& p, const HomotopyConfig& cfg, HomotopyResult& out) {
  const double a = out.stages.back().a;
  const QuadraticOperator& w = p.energy.quadratic();
  const TangentProjector proj(p.energy.rows(), p.energy.cols());
  const Index dirs = std::min<Index>(kEscapeDirections, (p.energy.rows() - 1) * (p.energy.cols() - 1));
  MatrixXd found(p.energy.dim(), 0);
  const LinearMap deflate = [&proj, &found](const VectorXd& v) {
    VectorXd u = proj(v);
    u -= found * (found.transpose() * u);
    return u;
  };
  const VectorXd x = out.relaxed.stacked();
  for (Index d = 0; d < dirs; ++d) {
    const EigResult dir = max_magnitude_eig(
        [&w, a](const VectorXd& v) { return VectorXd(w.apply(v) - a * v); }, p.energy.dim(), cfg.eig, deflate);
    const VectorXd v = proj(dir.vector);
    const double reach = v.cwiseAbs().maxCoeff();
    if (dir.lambda == 0.0 || !(reach > 0.0)) {
      return;
    }
    found.conservativeResize(Eigen::NoChange, d + 1);
    found.col(d) = v.normalized();
    const double step = 0.5 * x.minCoeff() / reach;
    for (double sign : {1.0, -1.0}) {
      const Coupling start{unstack(VectorXd(x + sign * step * v), p.energy.rows(), p.energy.cols()),
                           out.relaxed.marginals};
      RelaxResult r = relax_at(p, a, cfg.solver, &start);
      const Assignment candidate = p.project(r.coupling.values);
      const double energy = p.energy_of(candidate);
      if (energy < out.energy) {
        out.assignment = candidate;
        out.energy = energy;
        out.relaxed = std::move(r.coupling);
        out.escaped = true;
      }
    }
  }
}

}  // namespace

HomotopyResult homotopy_solve(const Problem& p, const HomotopyConfig& cfg) {
  cfg.validate();
  const EigRange range = lambda_bar_range(p.energy, cfg.eig);
  HomotopyResult out =
      run_path(p, cfg, range, cfg.a_lo.value_or(range.lambda_bar_min), cfg.a_hi.value_or(range.lambda_bar_max));
  if (cfg.final_l2_projection) {
    out.assignment = p.project(out.relaxed.values);
    out.energy = p.energy_of(out.assignment);
    if (out.stages.back().integrality > kStalledIntegrality) {
      escape_stationary_point(p, cfg, out);
    }
  } else {
    out.energy = eval_energy(p.energy, out.relaxed.stacked());
  }
  return out;
}

HomotopyResult fuzzy_solve(const Problem& p, const HomotopyConfig& cfg) {
  cfg.validate();
  const EigRange range = lambda_bar_range(p.energy, cfg.eig);
  const double lo = std::min(cfg.a_lo.value_or(range.lambda_bar_min), 0.0);
  HomotopyResult out = run_path(p, cfg, range, lo, 0.0);
  out.energy = eval_energy(p.energy, out.relaxed.stacked());
  return out;
}

BoundReport bound_hierarchy(const Problem& p, const HomotopyConfig& cfg) {
  cfg.validate();
  const EnergySpec& e = p.energy;
  BoundReport report;
  const EigRange full = full_range(e, cfg.eig);
  report.lambda_min = full.lambda_bar_min;

  SolverConfig bound_solver = cfg.solver;
  bound_solver.refine_levels = std::max(bound_solver.refine_levels, cfg.bound_refine_levels);

  if (!e.has_linear_term() && p.slack_rows == 0) {
    report.spectral = p.mass() * report.lambda_min + e.constant();
  }
  const double convex_tol = 1e-9 * std::max(1.0, std::abs(full.lambda_bar_max));
  if (report.lambda_min >= -convex_tol) {
    report.ds = relax_at(p, 0.0, bound_solver).objective;
  }
  report.ds_plus = relax_at(p, report.lambda_min, bound_solver).objective;

  const HomotopyResult path = homotopy_solve(p, cfg);
  report.range = path.range;
  report.ds_pp = path.lower_bound;
  report.ds_pp_certified = dual_bound(p, path.range.lambda_bar_min, path.convex);
  report.assignment = path.assignment;
  report.upper = path.energy;
  return report;
}

}  // namespace dspp
