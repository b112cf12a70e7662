#pragma once

#include "dspp/core.hpp"

namespace dspp {

struct AssignmentResult {
  Assignment assignment;
  double cost = 0.0;
  VectorXd row_potential;  // u: cost(i, j) - u(i) - v(j) >= 0, tight on the assignment
  VectorXd col_potential;  // v
};

/// Minimum-cost injective assignment of the k rows of `cost` into its n >= k
/// columns (shortest augmenting paths with potentials, O(k^2 n)).
AssignmentResult solve_assignment(const MatrixXd& cost);

/// Like solve_assignment, but among all optimal assignments returns the
/// lexicographically smallest target vector. `tol` decides ties and
/// defaults to a small multiple of the cost scale.
Assignment solve_assignment_lex(const MatrixXd& cost, double tol = -1.0);

/// Nearest injective assignment in Frobenius norm, i.e. the maximizer of
/// sum_i x(i, p(i)). Ties go to the lexicographically smallest assignment.
Assignment l2_project(const MatrixXd& x);
inline Assignment l2_project(const Coupling& x) { return l2_project(x.values); }

/// Row-wise argmax, smallest index on ties. Not injective in general.
std::vector<int> max_coordinate_project(const MatrixXd& x);

}  // namespace dspp
