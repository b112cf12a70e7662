#pragma once

#include "dspp/core.hpp"
#include "dspp/qpsolver.hpp"
#include "dspp/spectral.hpp"

#include <optional>
#include <vector>

namespace dspp {

/// An energy together with the coupling polytope it is relaxed over.
/// Augmented injective problems carry `slack_rows` leading rows that absorb
/// the unmatched columns; they are dropped from the reported assignment.
struct Problem {
  EnergySpec energy;
  MarginalSpec marginals;
  Index slack_rows = 0;

  /// Permutations of a square energy, relaxed over doubly stochastic matrices.
  static Problem permutation(const EnergySpec& e);

  Index matched_rows() const { return energy.rows() - slack_rows; }
  /// ||X||_F^2 at every vertex of the polytope (the total mass).
  double mass() const { return marginals.total_mass(); }
  /// The polytope vertex of an assignment of the matched rows, with the
  /// slack rows covering the remaining columns.
  MatrixXd vertex(const Assignment& a) const;
  double energy_of(const Assignment& a) const { return eval_energy(energy, stack(vertex(a))); }
  /// Nearest vertex in Frobenius norm; the slack rows are ignored.
  Assignment project(const MatrixXd& x) const;
};

struct HomotopyConfig {
  int num_samples = 10;                // N + 1
  std::optional<double> a_lo;          // default lambda_bar_min
  std::optional<double> a_hi;          // default lambda_bar_max
  bool final_l2_projection = true;
  SolverConfig solver{};
  int bound_refine_levels = 2;         // solver refinement for the convex stage
  EigOptions eig{};

  void validate() const;
};

/// `count` points spaced uniformly on [lo, hi], endpoints included. A single
/// point when lo == hi.
std::vector<double> homotopy_samples(double lo, double hi, int count);

struct RelaxResult {
  Coupling coupling;
  double shift = 0.0;
  /// Shifted energy at the returned coupling.
  double objective = 0.0;
  double dual_bound = 0.0;  // see dual_bound()
  SolveTrace trace;
};

/// Frank-Wolfe dual value of E(., a) at x: f(x) + min_y <grad f(x), y - x>
/// over the polytope. A lower bound on the relaxation whenever E(., a) is
/// convex there. NaN unless the rows have integral marginals and the columns
/// unit marginals.
double dual_bound(const Problem& p, double a, const Coupling& x);

/// Locally minimizes E(X, a) over the polytope, from `init` or the uniform
/// coupling.
RelaxResult relax_at(const Problem& p, double a, const SolverConfig& cfg, const Coupling* init = nullptr);

/// Convex relaxation at a = lambda_bar_min; its objective is the ds_pp bound.
RelaxResult relax_convex(const Problem& p, const HomotopyConfig& cfg = {});
inline RelaxResult relax_convex(const EnergySpec& e, const HomotopyConfig& cfg = {}) {
  return relax_convex(Problem::permutation(e), cfg);
}

struct StageTrace {
  double a = 0.0;
  double initial_objective = 0.0;  // previous stage's coupling under this stage's shift
  double final_objective = 0.0;
  Index iterations = 0;
  bool converged = false;
  double integrality = 0.0;        // max distance of an entry from {0, 1}
};

struct HomotopyResult {
  Assignment assignment;           // empty when the final projection is off
  double energy = 0.0;             // E at the assignment
  double lower_bound = 0.0;        // objective of the convex stage
  Coupling convex;                 // convex stage solution
  Coupling relaxed;                // last stage solution, before projection
  EigRange range;
  std::vector<StageTrace> stages;
  bool escaped = false;            // assignment came from a restart off a stationary point
};

/// Solves the shifted relaxations for a_0 = a_lo < ... < a_N = a_hi, each
/// warm-started from the previous solution, then projects onto the vertices.
/// A last stage that ends far from integral (a stationary point, e.g. forced
/// by symmetry) is re-solved from both sides of its steepest curvature
/// direction and the best vertex is kept.
HomotopyResult homotopy_solve(const Problem& p, const HomotopyConfig& cfg = {});
inline HomotopyResult homotopy_solve(const EnergySpec& e, const HomotopyConfig& cfg = {}) {
  return homotopy_solve(Problem::permutation(e), cfg);
}

/// Homotopy over [lambda_bar_min, 0] without projection: a local minimizer
/// of the unshifted energy over the polytope. A single solve at a = 0 when
/// the energy is already convex there.
HomotopyResult fuzzy_solve(const Problem& p, const HomotopyConfig& cfg = {});
inline HomotopyResult fuzzy_solve(const EnergySpec& e, const HomotopyConfig& cfg = {}) {
  return fuzzy_solve(Problem::permutation(e), cfg);
}

struct BoundReport {
  std::optional<double> spectral;  // n lambda_min(W) + d, only for c = 0
  std::optional<double> ds;        // unshifted relaxation, only for convex W
  double ds_plus = 0.0;            // shift lambda_min(W)
  double ds_pp = 0.0;              // shift lambda_bar_min
  double ds_pp_certified = 0.0;    // dual bound of the relaxation at lambda_bar_min
  double upper = 0.0;              // energy of the homotopy assignment
  Assignment assignment;
  double lambda_min = 0.0;
  EigRange range;
};

BoundReport bound_hierarchy(const Problem& p, const HomotopyConfig& cfg = {});
inline BoundReport bound_hierarchy(const EnergySpec& e, const HomotopyConfig& cfg = {}) {
  return bound_hierarchy(Problem::permutation(e), cfg);
}

}  // namespace dspp
