#include "dspp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace dspp {

VectorXd project_ds_tangent(const VectorXd& u) {
  const auto n = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(u.size()))));
  if (n * n != u.size()) {
    throw DimensionError("project_ds_tangent: length " + std::to_string(u.size()) +
                         " is not a perfect square");
  }
  return TangentProjector(n)(u);
}

namespace {

constexpr Index kRateWindow = 100;     // power iterations between progress checks
constexpr Index kLanczosSteps = 200;   // Krylov dimension per Lanczos cycle
constexpr double kPowerHorizon = 1000; // longest predicted power run before switching
constexpr Index kKeep = 20;           // Ritz vectors carried over a Lanczos restart
constexpr Index kCheckEvery = 10;     // Lanczos steps between Ritz extractions
constexpr Index kStallWindow = 20;     // Lanczos steps over which a settled Ritz value counts as converged

// Orthonormalizes the columns of v in place (modified Gram-Schmidt, two
// passes), dropping columns that are numerically dependent. Returns the
// number of columns kept.
Index orthonormalize(MatrixXd& v, double rel_drop = 1e-10) {
  Index kept = 0;
  double scale = 0.0;
  for (Index j = 0; j < v.cols(); ++j) {
    scale = std::max(scale, v.col(j).norm());
  }
  for (Index j = 0; j < v.cols(); ++j) {
    VectorXd col = v.col(j);
    const double before = col.norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (Index q = 0; q < kept; ++q) {
        col -= v.col(q).dot(col) * v.col(q);
      }
    }
    const double after = col.norm();
    if (after <= rel_drop * std::max(before, scale) || after == 0.0) {
      continue;
    }
    v.col(kept++) = col / after;
  }
  v.conservativeResize(Eigen::NoChange, kept);
  return kept;
}

// Thick-restart Lanczos with full reorthogonalization. The basis V and its
// image AV are stored and the Ritz pairs come from V^T A V; a restart keeps
// the kKeep Ritz vectors of largest magnitude plus the last Krylov direction.
// Used when power iteration is too slow, typically for a near-continuum of
// eigenvalues next to the extreme one. There the Ritz vector may never
// settle while the Ritz value does, so a value that moved by at most
// tol * scale over the last kStallWindow steps is accepted as well.
std::optional<EigResult> lanczos(const LinearMap& apply, const LinearMap& projector, Index dim,
                                 const EigOptions& opts, const VectorXd& start, Index budget,
                                 Index& iterations) {
  const double floor = std::max(opts.scale, 0.0);
  const Index steps = std::min(dim, kLanczosSteps);
  const Index keep = std::min<Index>(kKeep, steps / 2);
  const double sn = start.norm();
  if (sn == 0.0) {
    return EigResult{0.0, 0.0, iterations, start};
  }
  MatrixXd basis(dim, steps);
  MatrixXd image(dim, steps);
  MatrixXd h = MatrixXd::Zero(steps, steps);
  Index used = 0;
  VectorXd next = start / sn;
  std::vector<double> history;
  EigResult current;

  while (iterations < budget) {
    const Index j = used;
    basis.col(j) = next;
    image.col(j) = apply(next);
    ++iterations;
    h.col(j).head(j + 1) = basis.leftCols(j + 1).transpose() * image.col(j);
    h.row(j).head(j + 1) = h.col(j).head(j + 1).transpose();
    used = j + 1;

    VectorXd w = image.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      w -= basis.leftCols(used) * (basis.leftCols(used).transpose() * w);
      // Rounding outside Image(P) is amplified by 1/||w|| every step.
      if (projector) w = projector(w);
    }
    const double beta = w.norm();
    const bool full = used == steps || used == dim;
    if (used % kCheckEvery != 0 && !full && beta > 0.0) {
      next = w / beta;
      continue;
    }

    const Eigen::SelfAdjointEigenSolver<MatrixXd> ritz(h.topLeftCorner(used, used));
    Index pick = 0;
    ritz.eigenvalues().cwiseAbs().maxCoeff(&pick);
    const double lambda = ritz.eigenvalues()(pick);
    const VectorXd y = ritz.eigenvectors().col(pick);
    const VectorXd x = basis.leftCols(used) * y;
    const double residual = (image.leftCols(used) * y - lambda * x).norm();
    const double target = opts.tol * std::max(std::abs(lambda), floor);
    history.push_back(lambda);
    const auto hs = static_cast<Index>(history.size());
    const Index lag = kStallWindow / kCheckEvery;
    const bool settled =
        hs > 2 * lag && std::abs(lambda - history[static_cast<std::size_t>(hs - 1 - lag)]) <= target;
    current = {lambda, residual, iterations, x};

    const bool exhausted = beta <= 1e-12 * std::max({std::abs(lambda), floor, 1e-300});
    if (residual <= target || settled || exhausted || used == dim) {
      return current;
    }
    next = w / beta;

    if (used == steps) {
      // Keep the Ritz vectors of largest magnitude.
      std::vector<Index> order(static_cast<std::size_t>(used));
      for (Index i = 0; i < used; ++i) order[static_cast<std::size_t>(i)] = i;
      std::sort(order.begin(), order.end(), [&](Index l, Index r) {
        return std::abs(ritz.eigenvalues()(l)) > std::abs(ritz.eigenvalues()(r));
      });
      MatrixXd y_keep(used, keep);
      for (Index i = 0; i < keep; ++i) y_keep.col(i) = ritz.eigenvectors().col(order[static_cast<std::size_t>(i)]);
      const MatrixXd kept_basis = basis.leftCols(used) * y_keep;
      const MatrixXd kept_image = image.leftCols(used) * y_keep;
      basis.leftCols(keep) = kept_basis;
      image.leftCols(keep) = kept_image;
      h.setZero();
      h.topLeftCorner(keep, keep) = kept_basis.transpose() * kept_image;
      used = keep;
    }
  }
  return std::nullopt;
}

}  // namespace

EigResult max_magnitude_eig(const LinearMap& op, Index dim, const EigOptions& opts,
                            const LinearMap& projector) {
  if (dim < 1) {
    throw DimensionError("max_magnitude_eig: dimension must be positive");
  }
  const Index max_iters = opts.max_iters > 0 ? opts.max_iters : std::max<Index>(10 * dim, 2000);
  const Index block = std::clamp<Index>(opts.block, 1, dim);
  const LinearMap apply = projector ? LinearMap([&](const VectorXd& v) { return projector(op(v)); }) : op;
  const double floor = std::max(opts.scale, 0.0);

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  Index total_iters = 0;

  MatrixXd v = MatrixXd::NullaryExpr(dim, block, [&] { return normal(rng); });
  if (projector) {
    for (Index j = 0; j < block; ++j) v.col(j) = projector(v.col(j));
  }
  if (orthonormalize(v) == 0) {
    // Image of the projector is trivial.
    return {0.0, 0.0, total_iters, VectorXd::Zero(dim)};
  }

  EigResult best;
  double checkpoint = std::numeric_limits<double>::infinity();
  for (Index it = 1; it <= max_iters; ++it) {
    ++total_iters;
    MatrixXd av(dim, v.cols());
    for (Index j = 0; j < v.cols(); ++j) av.col(j) = apply(v.col(j));
    if (av.cwiseAbs().maxCoeff() <= 1e-300) {
      return {0.0, 0.0, total_iters, v.col(0)};
    }
    // Rayleigh-Ritz on span(v).
    const MatrixXd h = v.transpose() * av;
    const Eigen::SelfAdjointEigenSolver<MatrixXd> ritz(0.5 * (h + h.transpose()));
    const VectorXd& theta = ritz.eigenvalues();
    Index pick = 0;
    theta.cwiseAbs().maxCoeff(&pick);
    const VectorXd x = v * ritz.eigenvectors().col(pick);
    const VectorXd ax = av * ritz.eigenvectors().col(pick);
    const double lambda = theta(pick);
    const double residual = (ax - lambda * x).norm();
    const double target = opts.tol * std::max(std::abs(lambda), floor);
    best = {lambda, residual, total_iters, x};
    if (residual <= target) {
      return best;
    }
    // Hand over to Lanczos once the observed decay rate cannot reach the
    // target within the remaining budget.
    if (it % kRateWindow == 0) {
      const double rate = std::log(residual / checkpoint) / static_cast<double>(kRateWindow);
      checkpoint = residual;
      const double needed = std::log(target / residual) / rate;
      if (!(rate < 0.0) || needed > std::min(kPowerHorizon, static_cast<double>(max_iters - it))) {
        break;
      }
    }
    v = av * ritz.eigenvectors();
    if (orthonormalize(v) == 0) {
      return {0.0, 0.0, total_iters, x};
    }
  }

  if (std::optional<EigResult> refined = lanczos(apply, projector, dim, opts, best.vector,
                                                           total_iters + max_iters, total_iters)) {
    return *refined;
  }
  throw ConvergenceError("max_magnitude_eig: no convergence after " + std::to_string(total_iters) +
                         " operator applications (last residual " + std::to_string(best.residual) + ")");
}

EigRange extreme_eigenvalues(const LinearMap& op, Index dim, const EigOptions& opts,
                             const LinearMap& projector) {
  const EigResult first = max_magnitude_eig(op, dim, opts, projector);
  EigRange range;
  range.iterations_used = first.iterations;
  range.residual = first.residual;
  if (first.lambda == 0.0) {
    return range;
  }

  const double top = first.lambda;
  EigOptions second_opts = opts;
  second_opts.seed = opts.seed + 1;
  second_opts.scale = std::max(opts.scale, std::abs(top));
  // top - op on the positive side, op - top on the negative side; both are
  // positive semidefinite on the relevant subspace.
  const double sign = top > 0.0 ? 1.0 : -1.0;
  const LinearMap shifted = [&](const VectorXd& v) -> VectorXd { return sign * (top * v - op(v)); };
  const EigResult second = max_magnitude_eig(shifted, dim, second_opts, projector);
  const double spread = std::max(second.lambda, 0.0);

  range.iterations_used += second.iterations;
  range.residual = std::max(range.residual, second.residual);
  if (top > 0.0) {
    range.lambda_bar_max = top;
    range.lambda_bar_min = top - spread;
  } else {
    range.lambda_bar_min = top;
    range.lambda_bar_max = top + spread;
  }
  return range;
}

EigRange lambda_bar_range(const EnergySpec& e, const EigOptions& opts) {
  const TangentProjector proj(e.rows(), e.cols());
  const QuadraticOperator& w = e.quadratic();
  return extreme_eigenvalues([&w](const VectorXd& v) { return w.apply(v); }, e.dim(), opts,
                             [&proj](const VectorXd& v) { return proj(v); });
}

EigRange full_range(const EnergySpec& e, const EigOptions& opts) {
  const QuadraticOperator& w = e.quadratic();
  return extreme_eigenvalues([&w](const VectorXd& v) { return w.apply(v); }, e.dim(), opts);
}

double lambda_min_full(const EnergySpec& e, const EigOptions& opts) {
  return full_range(e, opts).lambda_bar_min;
}

}  // namespace dspp
