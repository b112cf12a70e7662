#include "dspp/projection.hpp"

#include <algorithm>
#include <limits>

namespace dspp {

AssignmentResult solve_assignment(const MatrixXd& cost) {
  const Index k = cost.rows();
  const Index n = cost.cols();
  if (k > n) {
    throw DimensionError("solve_assignment: more rows (" + std::to_string(k) + ") than columns (" +
                         std::to_string(n) + ")");
  }
  if (!cost.allFinite()) {
    throw InputError("solve_assignment: cost matrix has non-finite entries");
  }
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; column 0 is the virtual root of each augmenting tree.
  std::vector<double> u(k + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<Index> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);

  for (Index i = 1; i <= k; ++i) {
    match[0] = i;
    Index j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const Index i0 = match[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const Index j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  AssignmentResult out;
  out.assignment.targets.assign(k, -1);
  for (Index j = 1; j <= n; ++j) {
    if (match[j] != 0) {
      out.assignment.targets[match[j] - 1] = static_cast<int>(j - 1);
    }
  }
  for (Index i = 0; i < k; ++i) {
    out.cost += cost(i, out.assignment.targets[i]);
  }
  out.row_potential = Eigen::Map<const VectorXd>(u.data() + 1, k);
  out.col_potential = Eigen::Map<const VectorXd>(v.data() + 1, n);
  return out;
}

namespace {

// Best completion of a partial assignment that pins rows [0, prefix.size()).
AssignmentResult complete(const MatrixXd& cost, const std::vector<int>& prefix) {
  const Index k = cost.rows();
  const Index n = cost.cols();
  const Index f = static_cast<Index>(prefix.size());
  std::vector<char> taken(n, 0);
  AssignmentResult out;
  out.assignment.targets = prefix;
  for (Index i = 0; i < f; ++i) {
    taken[prefix[i]] = 1;
    out.cost += cost(i, prefix[i]);
  }
  if (f == k) {
    return out;
  }
  std::vector<Index> free_cols;
  for (Index j = 0; j < n; ++j) {
    if (!taken[j]) free_cols.push_back(j);
  }
  MatrixXd sub(k - f, static_cast<Index>(free_cols.size()));
  for (Index c = 0; c < sub.cols(); ++c) {
    sub.col(c) = cost.col(free_cols[c]).tail(k - f);
  }
  const AssignmentResult rest = solve_assignment(sub);
  for (int t : rest.assignment.targets) {
    out.assignment.targets.push_back(static_cast<int>(free_cols[t]));
  }
  out.cost += rest.cost;
  return out;
}

}  // namespace

Assignment solve_assignment_lex(const MatrixXd& cost, double tol) {
  const AssignmentResult best = solve_assignment(cost);
  const Index k = cost.rows();
  const Index n = cost.cols();
  if (tol < 0.0) {
    tol = 1e-10 * std::max(1.0, cost.cwiseAbs().maxCoeff()) * static_cast<double>(std::max<Index>(k, 1));
  }
  // Every edge of an optimal assignment is tight under the optimal
  // potentials, so only tight edges below the current choice need a re-solve.
  std::vector<int> current = best.assignment.targets;
  std::vector<int> prefix;
  std::vector<char> taken(n, 0);
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < current[i]; ++j) {
      if (taken[j] || cost(i, j) - best.row_potential(i) - best.col_potential(j) > tol) continue;
      prefix.push_back(static_cast<int>(j));
      AssignmentResult trial = complete(cost, prefix);
      prefix.pop_back();
      if (trial.cost <= best.cost + tol) {
        current = std::move(trial.assignment.targets);
        break;
      }
    }
    prefix.push_back(current[i]);
    taken[current[i]] = 1;
  }
  return Assignment{current};
}

Assignment l2_project(const MatrixXd& x) { return solve_assignment_lex(-x); }

std::vector<int> max_coordinate_project(const MatrixXd& x) {
  std::vector<int> out(x.rows());
  for (Index i = 0; i < x.rows(); ++i) {
    Index arg = 0;
    x.row(i).maxCoeff(&arg);  // first maximal index
    out[i] = static_cast<int>(arg);
  }
  return out;
}

}  // namespace dspp
