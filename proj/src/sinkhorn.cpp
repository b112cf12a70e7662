#include "dspp/sinkhorn.hpp"

#include <cmath>
#include <limits>

namespace dspp {

namespace {

constexpr double kAbsorbAbove = 1e100;
constexpr double kAbsorbBelow = 1e-100;
constexpr Index kNewtonMaxDim = 1200;  // dense Hessian beyond this is too slow

double log_sum_exp(const Eigen::Ref<const VectorXd>& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) {
    return m;
  }
  return m + std::log((v.array() - m).exp().sum());
}

void check_kernel(const MatrixXd& log_kernel, const MarginalSpec& marginals) {
  if (log_kernel.rows() != marginals.rows.size() || log_kernel.cols() != marginals.cols.size()) {
    throw DimensionError("kl_project: kernel is " + std::to_string(log_kernel.rows()) + "x" +
                         std::to_string(log_kernel.cols()) + " but marginals are " +
                         std::to_string(marginals.rows.size()) + "x" + std::to_string(marginals.cols.size()));
  }
  marginals.validate();
  if ((log_kernel.array().isNaN() || log_kernel.array() == std::numeric_limits<double>::infinity()).any()) {
    throw InputError("kl_project: kernel logarithm contains NaN or +inf");
  }
  const double ninf = -std::numeric_limits<double>::infinity();
  if ((log_kernel.array() == ninf).rowwise().all().any() ||
      (log_kernel.array() == ninf).colwise().all().any()) {
    throw InfeasibleError("kl_project: kernel has an identically zero row or column");
  }
}

// Maximal relative deviation of the row and column sums from the marginals.
double marginal_deviation(const MatrixXd& coupling, const MarginalSpec& m) {
  const double er = ((coupling.rowwise().sum() - m.rows).array().abs() / m.rows.array()).maxCoeff();
  const double ec =
      ((coupling.colwise().sum().transpose() - m.cols).array().abs() / m.cols.array()).maxCoeff();
  return std::max(er, ec);
}

// Newton's method on the dual of the KL projection,
//   max  r.log_u + c.log_v - sum_ij exp(L_ij + log_u_i + log_v_j),
// with the last column potential pinned. Converges quadratically even when
// the kernel is close to block diagonal, where plain alternating scaling
// crawls. Returns true once the marginal error is at most tol.
bool newton_balance(const MatrixXd& log_kernel, const MarginalSpec& m, VectorXd& log_u, VectorXd& log_v,
                    double tol, int max_steps) {
  const Index k = log_kernel.rows();
  const Index n = log_kernel.cols();
  const Index dim = k + n - 1;
  auto coupling_of = [&](const VectorXd& lu, const VectorXd& lv) -> MatrixXd {
    return ((log_kernel.colwise() + lu).rowwise() + lv.transpose()).array().exp();
  };
  auto dual = [&](const VectorXd& lu, const VectorXd& lv, const MatrixXd& x) {
    return m.rows.dot(lu) + m.cols.dot(lv) - x.sum();
  };

  MatrixXd x = coupling_of(log_u, log_v);
  double value = dual(log_u, log_v, x);
  for (int step = 0; step < max_steps; ++step) {
    if (!x.allFinite()) {
      return false;
    }
    if (marginal_deviation(x, m) <= tol) {
      return true;
    }
    const VectorXd row_mass = x.rowwise().sum();
    const VectorXd col_mass = x.colwise().sum().transpose();
    VectorXd grad(dim);
    grad.head(k) = m.rows - row_mass;
    grad.tail(n - 1) = (m.cols - col_mass).head(n - 1);
    MatrixXd hess = MatrixXd::Zero(dim, dim);
    hess.topLeftCorner(k, k).diagonal() = row_mass;
    hess.bottomRightCorner(n - 1, n - 1).diagonal() = col_mass.head(n - 1);
    hess.topRightCorner(k, n - 1) = x.leftCols(n - 1);
    hess.bottomLeftCorner(n - 1, k) = x.leftCols(n - 1).transpose();
    hess.diagonal().array() += 1e-14 * hess.diagonal().maxCoeff();
    const Eigen::LDLT<MatrixXd> ldlt(hess);
    if (ldlt.info() != Eigen::Success) {
      return false;
    }
    const VectorXd dir = ldlt.solve(grad);
    const double slope = grad.dot(dir);
    if (!dir.allFinite() || !(slope > 0.0)) {
      return false;
    }
    bool accepted = false;
    for (double t = 1.0; t > 1e-10; t *= 0.5) {
      VectorXd lu = log_u + t * dir.head(k);
      VectorXd lv = log_v;
      lv.head(n - 1) += t * dir.tail(n - 1);
      MatrixXd xt = coupling_of(lu, lv);
      const double vt = dual(lu, lv, xt);
      if (xt.allFinite() && (vt >= value + 1e-4 * t * slope ||
                             marginal_deviation(xt, m) < 0.5 * marginal_deviation(x, m))) {
        log_u = std::move(lu);
        log_v = std::move(lv);
        x = std::move(xt);
        value = vt;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      return marginal_deviation(x, m) <= tol;
    }
  }
  return marginal_deviation(x, m) <= tol;
}

}  // namespace

SinkhornResult kl_project(const MatrixXd& log_kernel, const MarginalSpec& marginals,
                          const SinkhornOptions& opts, const ScalingState* warm_start) {
  check_kernel(log_kernel, marginals);
  const Index k = log_kernel.rows();
  const Index n = log_kernel.cols();
  const VectorXd log_r = marginals.rows.array().log();
  const VectorXd log_c = marginals.cols.array().log();

  VectorXd log_u = VectorXd::Zero(k);
  VectorXd log_v = VectorXd::Zero(n);
  if (warm_start && warm_start->log_u.size() == k && warm_start->log_v.size() == n) {
    log_u = warm_start->log_u;
    log_v = warm_start->log_v;
  }

  SinkhornResult result;
  MatrixXd kernel(k, n);
  VectorXd a(k);
  VectorXd b(n);

  auto refresh_kernel = [&] {
    kernel = ((log_kernel.colwise() + log_u).rowwise() + log_v.transpose()).array().exp();
  };
  // Exact log-domain half steps, used at start-up and whenever the linear
  // domain under- or overflows.
  auto log_row_update = [&] {
    log_v.array() += b.array().log();
    b.setOnes();
    for (Index i = 0; i < k; ++i) {
      log_u(i) = log_r(i) - log_sum_exp(log_kernel.row(i).transpose() + log_v);
    }
    a.setOnes();
    refresh_kernel();
  };
  auto log_col_update = [&] {
    log_u.array() += a.array().log();
    a.setOnes();
    for (Index j = 0; j < n; ++j) {
      log_v(j) = log_c(j) - log_sum_exp(log_kernel.col(j) + log_u);
    }
    b.setOnes();
    refresh_kernel();
  };
  auto usable = [](const VectorXd& s) { return s.allFinite() && (s.array() > 0.0).all(); };

  a.setOnes();
  b.setOnes();
  log_row_update();
  double err = std::numeric_limits<double>::infinity();
  Index it = 0;
  VectorXd col_mass = kernel.transpose() * a;
  for (; it < opts.max_iters; ++it) {
    b = marginals.cols.cwiseQuotient(col_mass);
    if (!usable(b)) {
      b.setOnes();
      log_col_update();
    }
    a = marginals.rows.cwiseQuotient(kernel * b);
    if (!usable(a)) {
      a.setOnes();
      log_row_update();
    }

    // Row sums are exact now; measure the column deviation.
    col_mass = kernel.transpose() * a;
    err = ((col_mass.cwiseProduct(b) - marginals.cols).array().abs() / marginals.cols.array()).maxCoeff();
    if (opts.record_history) {
      result.history.push_back(err);
    }
    if (err <= opts.tol) {
      ++it;
      break;
    }
    if (opts.newton_after > 0 && it + 1 == opts.newton_after && k + n <= kNewtonMaxDim) {
      log_u.array() += a.array().log();
      log_v.array() += b.array().log();
      a.setOnes();
      b.setOnes();
      const bool done = newton_balance(log_kernel, marginals, log_u, log_v, opts.tol, 100);
      refresh_kernel();
      if (done) {
        // Finish on an exact row update so the row sums are tight.
        a = marginals.rows.cwiseQuotient(kernel * b);
        err = marginal_deviation((kernel.array().colwise() * a.array()).matrix(), marginals);
        if (usable(a) && err <= opts.tol) {
          ++it;
          break;
        }
        a.setOnes();
      }
      col_mass = kernel.transpose() * a;
      continue;
    }
    if (a.maxCoeff() > kAbsorbAbove || a.minCoeff() < kAbsorbBelow || b.maxCoeff() > kAbsorbAbove ||
        b.minCoeff() < kAbsorbBelow) {
      log_u.array() += a.array().log();
      log_v.array() += b.array().log();
      a.setOnes();
      b.setOnes();
      refresh_kernel();
      col_mass = kernel.transpose() * a;
    }
  }

  log_u.array() += a.array().log();
  log_v.array() += b.array().log();
  result.log_coupling = (log_kernel.colwise() + log_u).rowwise() + log_v.transpose();
  result.coupling.values = result.log_coupling.array().exp();
  result.coupling.marginals = marginals;
  result.state.log_u = std::move(log_u);
  result.state.log_v = std::move(log_v);
  result.state.iterations = it;
  result.state.marginal_error = result.coupling.marginal_error();
  if (!(err <= opts.tol)) {
    throw ConvergenceError("kl_project: marginal error " + std::to_string(err) + " after " +
                           std::to_string(opts.max_iters) + " iterations");
  }
  return result;
}

double kl_divergence(const MatrixXd& x, const MatrixXd& log_y) {
  double s = 0.0;
  for (Index j = 0; j < x.cols(); ++j) {
    for (Index i = 0; i < x.rows(); ++i) {
      const double v = x(i, j);
      if (v > 0.0) {
        s += v * (std::log(v) - log_y(i, j));
      }
    }
  }
  return s;
}

}  // namespace dspp
