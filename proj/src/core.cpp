#include "dspp/core.hpp"

#include <algorithm>
#include <cmath>

namespace dspp {

QuadraticOperator QuadraticOperator::dense(const MatrixXd& w) {
  if (w.rows() != w.cols()) {
    throw DimensionError("quadratic operator: matrix must be square");
  }
  MatrixXd sym = 0.5 * (w + w.transpose());
  return QuadraticOperator(
      std::make_shared<const std::variant<Dense, MatrixFree, LimitedSupport>>(Dense{std::move(sym)}));
}

QuadraticOperator QuadraticOperator::matrix_free(Index dim, MatVec apply) {
  if (dim < 0 || !apply) {
    throw InputError("quadratic operator: matrix-free variant needs a dimension and a matvec");
  }
  return QuadraticOperator(std::make_shared<const std::variant<Dense, MatrixFree, LimitedSupport>>(
      MatrixFree{dim, std::move(apply)}));
}

QuadraticOperator QuadraticOperator::limited_support(const QuadraticOperator& base,
                                                     const Mask& permissible, double rho) {
  if (permissible.size() != base.dim()) {
    throw DimensionError("limited support: mask size does not match operator dimension");
  }
  LimitedSupport ls;
  ls.base = std::make_shared<const QuadraticOperator>(base);
  ls.rho = rho;
  ls.mask = VectorXd::Zero(base.dim());
  const auto flat = permissible.reshaped();
  for (Index p = 0; p < flat.size(); ++p) {
    if (flat(p)) {
      ls.permissible.push_back(p);
      ls.mask(p) = 1.0;
    }
  }
  if (const MatrixXd* w = base.dense_matrix()) {
    ls.restricted = (*w)(ls.permissible, ls.permissible);
  }
  return QuadraticOperator(
      std::make_shared<const std::variant<Dense, MatrixFree, LimitedSupport>>(std::move(ls)));
}

Index QuadraticOperator::dim() const {
  return std::visit(
      [](const auto& r) -> Index {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Dense>) {
          return r.matrix.rows();
        } else if constexpr (std::is_same_v<T, MatrixFree>) {
          return r.dim;
        } else {
          return r.base->dim();
        }
      },
      *rep_);
}

VectorXd QuadraticOperator::apply(const VectorXd& x) const {
  if (x.size() != dim()) {
    throw DimensionError("quadratic operator: vector length " + std::to_string(x.size()) +
                         " does not match dimension " + std::to_string(dim()));
  }
  return std::visit(
      [&x](const auto& r) -> VectorXd {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Dense>) {
          return r.matrix * x;
        } else if constexpr (std::is_same_v<T, MatrixFree>) {
          return r.apply(x);
        } else {
          VectorXd out = r.rho * (VectorXd::Ones(x.size()) - r.mask).cwiseProduct(x);
          if (r.restricted.size() > 0 || r.permissible.empty()) {
            const VectorXd sub = x(r.permissible);
            out(r.permissible) += r.restricted * sub;
          } else {
            out += r.mask.cwiseProduct(r.base->apply(r.mask.cwiseProduct(x)));
          }
          return out;
        }
      },
      *rep_);
}

const MatrixXd* QuadraticOperator::dense_matrix() const {
  if (const auto* d = std::get_if<Dense>(rep_.get())) {
    return &d->matrix;
  }
  return nullptr;
}

MatrixXd QuadraticOperator::to_dense() const {
  if (const MatrixXd* w = dense_matrix()) {
    return *w;
  }
  const Index n = dim();
  MatrixXd out(n, n);
  VectorXd e = VectorXd::Zero(n);
  for (Index j = 0; j < n; ++j) {
    e(j) = 1.0;
    out.col(j) = apply(e);
    e(j) = 0.0;
  }
  return 0.5 * (out + out.transpose());
}

// ---------------------------------------------------------------------------

EnergySpec::EnergySpec(Index k, Index n, QuadraticOperator quadratic, VectorXd linear, double constant)
    : k_(k), n_(n), quadratic_(std::move(quadratic)), linear_(std::move(linear)), constant_(constant) {
  if (k <= 0 || n <= 0) {
    throw DimensionError("energy: sizes must be positive");
  }
  if (k > n) {
    throw DimensionError("energy: source count k=" + std::to_string(k) +
                         " exceeds target count n=" + std::to_string(n));
  }
  if (quadratic_.dim() != k * n) {
    throw DimensionError("energy: quadratic operator dimension " + std::to_string(quadratic_.dim()) +
                         " does not match k*n=" + std::to_string(k * n));
  }
  if (linear_.size() != k * n) {
    throw DimensionError("energy: linear term has length " + std::to_string(linear_.size()) +
                         ", expected " + std::to_string(k * n));
  }
}

EnergySpec::EnergySpec(Index k, Index n, QuadraticOperator quadratic)
    : EnergySpec(k, n, std::move(quadratic), VectorXd::Zero(k * n), 0.0) {}

// ---------------------------------------------------------------------------

MatrixXd Assignment::to_matrix(Index cols) const {
  MatrixXd m = MatrixXd::Zero(static_cast<Index>(targets.size()), cols);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0 || targets[i] >= cols) {
      throw DimensionError("assignment target out of range");
    }
    m(static_cast<Index>(i), targets[i]) = 1.0;
  }
  return m;
}

bool Assignment::is_injective(Index cols) const {
  std::vector<bool> used(static_cast<std::size_t>(std::max<Index>(cols, 0)), false);
  for (int t : targets) {
    if (t < 0 || t >= cols || used[static_cast<std::size_t>(t)]) {
      return false;
    }
    used[static_cast<std::size_t>(t)] = true;
  }
  return true;
}

Assignment Assignment::identity(Index n) {
  Assignment a;
  a.targets.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    a.targets[static_cast<std::size_t>(i)] = static_cast<int>(i);
  }
  return a;
}

void MarginalSpec::validate(double rel_tol) const {
  if (rows.size() == 0 || cols.size() == 0) {
    throw InfeasibleError("marginals: empty");
  }
  if (rows.minCoeff() <= 0.0 || cols.minCoeff() <= 0.0) {
    throw InfeasibleError("marginals: entries must be positive");
  }
  const double rs = rows.sum();
  const double cs = cols.sum();
  if (std::abs(rs - cs) > rel_tol * std::max(rs, cs)) {
    throw InfeasibleError("marginals: row mass " + std::to_string(rs) + " differs from column mass " +
                          std::to_string(cs));
  }
}

Coupling Coupling::uniform(const MarginalSpec& marginals) {
  marginals.validate();
  return {marginals.rows * marginals.cols.transpose() / marginals.total_mass(), marginals};
}

double Coupling::marginal_error() const {
  const VectorXd r = values.rowwise().sum();
  const VectorXd c = values.colwise().sum().transpose();
  const double er = ((r - marginals.rows).array().abs() / marginals.rows.array()).maxCoeff();
  const double ec = ((c - marginals.cols).array().abs() / marginals.cols.array()).maxCoeff();
  return std::max(er, ec);
}

bool is_integral(const MatrixXd& x, double tol) {
  return (x.array().abs() <= tol || (x.array() - 1.0).abs() <= tol).all();
}

double eval_energy(const EnergySpec& e, const VectorXd& x) {
  if (x.size() != e.dim()) {
    throw DimensionError("eval_energy: vector length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(e.dim()));
  }
  return e.quadratic().quadratic_form(x) + e.linear().dot(x) + e.constant();
}

double eval_shifted(const EnergySpec& e, const VectorXd& x, double a, double mass) {
  return eval_energy(e, x) - a * x.squaredNorm() + a * mass;
}

double eval_shifted(const EnergySpec& e, const VectorXd& x, double a) {
  return eval_shifted(e, x, a, static_cast<double>(e.cols()));
}

}  // namespace dspp
