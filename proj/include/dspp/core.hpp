#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace dspp {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Boolean mask over a k x n assignment matrix (true = permissible).
using Mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Error hierarchy. The CLI maps these onto exit codes.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DimensionError : InputError {
  using InputError::InputError;
};
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConvergenceError : SolverError {
  using SolverError::SolverError;
};
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Column stacking. Entry (i, j) of a k x n matrix lives at index j * k + i,
// which is Eigen's native column-major layout.

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> stack(
    const Eigen::MatrixBase<Derived>& m) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> dense = m;
  return dense.reshaped();
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> unstack(
    const Eigen::MatrixBase<Derived>& x, Index rows, Index cols) {
  if (x.size() != rows * cols) {
    throw DimensionError("unstack: vector of length " + std::to_string(x.size()) +
                         " cannot form a " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " matrix");
  }
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> v = x;
  return v.reshaped(rows, cols);
}

inline Index stack_index(Index row, Index col, Index rows) { return col * rows + row; }

// ---------------------------------------------------------------------------

/// Symmetric linear operator standing in for the quadratic coefficient
/// matrix W. Either an explicit dense matrix, a matrix-free matvec, or a
/// limited-support view of another operator.
class QuadraticOperator {
 public:
  using MatVec = std::function<VectorXd(const VectorXd&)>;

  struct Dense {
    MatrixXd matrix;
  };
  struct MatrixFree {
    Index dim;
    MatVec apply;
  };
  struct LimitedSupport {
    std::shared_ptr<const QuadraticOperator> base;
    std::vector<Index> permissible;  // stack indices
    VectorXd mask;                   // 1 on permissible, 0 on forbidden
    double rho;
    MatrixXd restricted;             // base restricted to permissible, if base is dense
  };

  QuadraticOperator() : QuadraticOperator(dense(MatrixXd::Zero(0, 0))) {}

  /// Stores (W + W^T) / 2.
  static QuadraticOperator dense(const MatrixXd& w);
  static QuadraticOperator matrix_free(Index dim, MatVec apply);
  static QuadraticOperator zero(Index dim) { return dense(MatrixXd::Zero(dim, dim)); }
  /// Quadratic form m.W.m + rho * (1 - m)^2 where m masks permissible entries.
  static QuadraticOperator limited_support(const QuadraticOperator& base, const Mask& permissible,
                                           double rho);

  Index dim() const;
  VectorXd apply(const VectorXd& x) const;
  double quadratic_form(const VectorXd& x) const { return x.dot(apply(x)); }

  bool is_dense() const { return std::holds_alternative<Dense>(*rep_); }
  /// The stored matrix for the dense variant, nullptr otherwise.
  const MatrixXd* dense_matrix() const;
  /// Materializes the operator column by column when it is not dense.
  MatrixXd to_dense() const;

  const std::variant<Dense, MatrixFree, LimitedSupport>& representation() const { return *rep_; }

 private:
  explicit QuadraticOperator(std::shared_ptr<const std::variant<Dense, MatrixFree, LimitedSupport>> rep)
      : rep_(std::move(rep)) {}
  std::shared_ptr<const std::variant<Dense, MatrixFree, LimitedSupport>> rep_;
};

/// Quadratic energy E(x) = x^T W x + c^T x + d over k x n assignment
/// variables, x the column stack of X.
class EnergySpec {
 public:
  EnergySpec(Index k, Index n, QuadraticOperator quadratic, VectorXd linear, double constant = 0.0);
  /// Purely quadratic energy, c = 0 and d = 0.
  EnergySpec(Index k, Index n, QuadraticOperator quadratic);

  Index rows() const { return k_; }
  Index cols() const { return n_; }
  Index dim() const { return k_ * n_; }
  bool square() const { return k_ == n_; }

  const QuadraticOperator& quadratic() const { return quadratic_; }
  const VectorXd& linear() const { return linear_; }
  double constant() const { return constant_; }
  bool has_linear_term() const { return linear_.size() > 0 && linear_.cwiseAbs().maxCoeff() > 0.0; }

  EnergySpec with_linear(VectorXd linear) const { return {k_, n_, quadratic_, std::move(linear), constant_}; }
  EnergySpec with_constant(double d) const { return {k_, n_, quadratic_, linear_, d}; }

 private:
  Index k_;
  Index n_;
  QuadraticOperator quadratic_;
  VectorXd linear_;
  double constant_;
};

/// Integral solution: targets[i] is the column matched to row i.
struct Assignment {
  std::vector<int> targets;

  std::size_t size() const { return targets.size(); }
  bool operator==(const Assignment&) const = default;
  auto operator<=>(const Assignment&) const = default;

  /// 0/1 matrix with a one at (i, targets[i]).
  MatrixXd to_matrix(Index cols) const;
  VectorXd to_stack(Index cols) const { return stack(to_matrix(cols)); }
  /// All targets distinct and inside [0, cols).
  bool is_injective(Index cols) const;
  bool is_permutation() const { return is_injective(static_cast<Index>(targets.size())); }
  static Assignment identity(Index n);
};
using Permutation = Assignment;

/// Row and column sums defining a coupling polytope.
struct MarginalSpec {
  VectorXd rows;
  VectorXd cols;

  static MarginalSpec doubly_stochastic(Index n) { return {VectorXd::Ones(n), VectorXd::Ones(n)}; }
  double total_mass() const { return cols.sum(); }
  /// Throws InfeasibleError unless all marginals are positive and the totals agree.
  void validate(double rel_tol = 1e-9) const;
};

/// Nonnegative matrix with prescribed marginals.
struct Coupling {
  MatrixXd values;
  MarginalSpec marginals;

  /// Outer product of the marginals divided by the total mass.
  static Coupling uniform(const MarginalSpec& marginals);
  /// Max relative deviation of row and column sums from the marginals.
  double marginal_error() const;
  bool is_feasible(double rel_tol = 1e-8) const {
    return values.minCoeff() >= 0.0 && marginal_error() <= rel_tol;
  }
  VectorXd stacked() const { return stack(values); }
};

/// True when every entry is within tol of 0 or 1.
bool is_integral(const MatrixXd& x, double tol = 1e-9);

double eval_energy(const EnergySpec& e, const VectorXd& x);
inline double eval_energy(const EnergySpec& e, const Assignment& p) {
  return eval_energy(e, p.to_stack(e.cols()));
}

/// E(X) - a ||X||_F^2 + a * mass. With mass = n this agrees with E on every
/// permutation (and on every vertex of an augmented injective polytope).
double eval_shifted(const EnergySpec& e, const VectorXd& x, double a);
double eval_shifted(const EnergySpec& e, const VectorXd& x, double a, double mass);

}  // namespace dspp
