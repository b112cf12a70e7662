#include "dspp/energies.hpp"

#include "dspp/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace dspp {

namespace {

constexpr Index kAutoDenseLimit = 1600;  // k * n up to which pair energies are stored densely

void check_distance_matrix(const MatrixXd& d, const char* name) {
  if (d.rows() != d.cols()) {
    throw DimensionError(std::string("metric: ") + name + " distance matrix is not square");
  }
  if (d.size() == 0) {
    return;
  }
  if (!d.allFinite()) {
    throw InputError(std::string("metric: ") + name + " distances must be finite");
  }
  const double tol = 1e-12 * std::max(1.0, d.cwiseAbs().maxCoeff());
  if (d.minCoeff() < -tol) {
    throw InputError(std::string("metric: ") + name + " distances must be nonnegative");
  }
  if ((d - d.transpose()).cwiseAbs().maxCoeff() > tol) {
    throw InputError(std::string("metric: ") + name + " distance matrix is not symmetric");
  }
  if (d.diagonal().cwiseAbs().maxCoeff() > tol) {
    throw InputError(std::string("metric: ") + name + " distance matrix has a nonzero diagonal");
  }
}

MatrixXd dense_pair_matrix(const MatrixXd& s, const MatrixXd& t, const PairPenalty& p) {
  const Index k = s.rows();
  const Index n = t.rows();
  MatrixXd w(k * n, k * n);
  for (Index l = 0; l < n; ++l) {
    for (Index q = 0; q < k; ++q) {
      const Index col = l * k + q;
      for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < k; ++i) {
          w(j * k + i, col) = p(s(i, q), t(j, l));
        }
      }
    }
  }
  return w;
}

// W x for W_{(i,j),(q,l)} = (s(i,q) - t(j,l))^2, expanded into products.
QuadraticOperator squared_difference_operator(const MatrixXd& s, const MatrixXd& t) {
  const Index k = s.rows();
  const Index n = t.rows();
  const MatrixXd s2 = s.cwiseAbs2();
  const MatrixXd t2 = t.cwiseAbs2();
  return QuadraticOperator::matrix_free(k * n, [s, t, s2, t2, k, n](const VectorXd& x) {
    const Eigen::Map<const MatrixXd> xm(x.data(), k, n);
    MatrixXd out = -2.0 * (s * xm * t);
    out.colwise() += s2 * xm.rowwise().sum();
    out.rowwise() += (t2 * xm.colwise().sum().transpose()).transpose();
    return VectorXd(out.reshaped());
  });
}

EnergySpec squared_difference_energy(const MatrixXd& s, const MatrixXd& t, Form form) {
  const Index k = s.rows();
  const Index n = t.rows();
  if (form == Form::dense) {
    return {k, n, QuadraticOperator::dense(dense_pair_matrix(s, t, PairPenalty::gw()))};
  }
  return {k, n, squared_difference_operator(s, t)};
}

}  // namespace

double MetricData::max_distance() const {
  double m = 0.0;
  if (source.size() > 0) m = std::max(m, source.maxCoeff());
  if (target.size() > 0) m = std::max(m, target.maxCoeff());
  return m;
}

void MetricData::validate() const {
  check_distance_matrix(source, "source");
  check_distance_matrix(target, "target");
  if (k() > n()) {
    throw DimensionError("metric: more source samples (" + std::to_string(k()) + ") than target samples (" +
                         std::to_string(n()) + ")");
  }
}

double PairPenalty::operator()(double u, double v) const {
  switch (kind) {
    case Kind::squared:
      return (u - v) * (u - v);
    case Kind::log_squared: {
      const double r = std::log(std::max(u, floor)) - std::log(std::max(v, floor));
      return r * r;
    }
    case Kind::gaussian:
      return -std::exp(-(u - v) * (u - v) / (sigma * sigma));
    case Kind::absolute:
      return std::abs(u - v);
  }
  return 0.0;
}

EnergySpec pair_energy(const MetricData& m, const PairPenalty& p, Form form) {
  m.validate();
  const Index k = m.k();
  const Index n = m.n();
  if (form == Form::dense || (form == Form::automatic && k * n <= kAutoDenseLimit)) {
    return {k, n, QuadraticOperator::dense(dense_pair_matrix(m.source, m.target, p))};
  }
  return {k, n, QuadraticOperator::matrix_free(k * n, [s = m.source, t = m.target, p, k, n](const VectorXd& x) {
            const Eigen::Map<const MatrixXd> xm(x.data(), k, n);
            VectorXd out(k * n);
            for (Index j = 0; j < n; ++j) {
              for (Index i = 0; i < k; ++i) {
                double acc = 0.0;
                for (Index l = 0; l < n; ++l) {
                  for (Index q = 0; q < k; ++q) {
                    acc += p(s(i, q), t(j, l)) * xm(q, l);
                  }
                }
                out(j * k + i) = acc;
              }
            }
            return out;
          })};
}

EnergySpec gw_energy(const MetricData& m, Form form) {
  m.validate();
  return squared_difference_energy(m.source, m.target, form);
}

double default_log_floor(const MetricData& m) {
  const double floor = 1e-6 * m.max_distance();
  return floor > 0.0 ? floor : 1e-300;
}

EnergySpec log_gw_energy(const MetricData& m, double eps_floor, Form form) {
  m.validate();
  const double floor = eps_floor > 0.0 ? eps_floor : default_log_floor(m);
  const MatrixXd ls = m.source.cwiseMax(floor).array().log();
  const MatrixXd lt = m.target.cwiseMax(floor).array().log();
  return squared_difference_energy(ls, lt, form);
}

EnergySpec gaussian_energy(const MetricData& m, double sigma, Form form) {
  if (!(sigma > 0.0)) {
    throw InputError("gaussian_energy: sigma must be positive");
  }
  return pair_energy(m, PairPenalty::gaussian(sigma), form);
}

MetricEnergy parse_metric_energy(const std::string& name) {
  if (name == "gw") return MetricEnergy::gw;
  if (name == "loggw") return MetricEnergy::log_gw;
  if (name == "gauss") return MetricEnergy::gaussian;
  throw InputError("unknown energy '" + name + "' (expected gw, loggw or gauss)");
}

EnergySpec metric_energy(const MetricData& m, MetricEnergy kind, double sigma) {
  switch (kind) {
    case MetricEnergy::gw:
      return gw_energy(m);
    case MetricEnergy::log_gw:
      return log_gw_energy(m);
    case MetricEnergy::gaussian:
      return gaussian_energy(m, sigma);
  }
  throw InputError("metric_energy: invalid kind");
}

PairPenalty metric_penalty(const MetricData& m, MetricEnergy kind, double sigma) {
  switch (kind) {
    case MetricEnergy::gw:
      return PairPenalty::gw();
    case MetricEnergy::log_gw:
      return PairPenalty::log_gw(default_log_floor(m));
    case MetricEnergy::gaussian:
      if (!(sigma > 0.0)) {
        throw InputError("metric_penalty: sigma must be positive");
      }
      return PairPenalty::gaussian(sigma);
  }
  throw InputError("metric_penalty: invalid kind");
}

EnergySpec graph_matching_energy(const MatrixXd& a, const MatrixXd& b, Form form) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw DimensionError("graph_matching_energy: A and B must be square and of equal size");
  }
  const Index n = a.rows();
  if (form == Form::dense) {
    // vec(A X - X B) = (I (x) A - B^T (x) I) vec(X)
    MatrixXd mk = MatrixXd::Zero(n * n, n * n);
    for (Index blk = 0; blk < n; ++blk) {
      mk.block(blk * n, blk * n, n, n) += a;
    }
    for (Index r = 0; r < n; ++r) {
      for (Index c = 0; c < n; ++c) {
        mk.block(r * n, c * n, n, n).diagonal().array() -= b(c, r);
      }
    }
    return {n, n, QuadraticOperator::dense(mk.transpose() * mk)};
  }
  return {n, n, QuadraticOperator::matrix_free(n * n, [a, b, n](const VectorXd& x) {
            const Eigen::Map<const MatrixXd> xm(x.data(), n, n);
            const MatrixXd r = a * xm - xm * b;
            const MatrixXd out = a.transpose() * r - r * b.transpose();
            return VectorXd(out.reshaped());
          })};
}

double mean_off_diagonal(const MatrixXd& d) {
  const Index n = d.rows();
  if (n < 2) {
    return 0.0;
  }
  return (d.sum() - d.trace()) / static_cast<double>(n * (n - 1));
}

EnergySpec fried_energy(const MatrixXd& d_images, const MatrixXd& d_grid, Form form) {
  const double mean_images = mean_off_diagonal(d_images);
  if (!(mean_images > 0.0)) {
    throw InputError("fried_energy: image distances have zero mean");
  }
  const double scale = mean_off_diagonal(d_grid) / mean_images;
  return pair_energy(MetricData{scale * d_images, d_grid}, PairPenalty::absolute(), form);
}

MatrixXd grid_distances(Index rows, Index cols) {
  const Index n = rows * cols;
  MatrixXd d(n, n);
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      const double dr = static_cast<double>(a / cols - b / cols);
      const double dc = static_cast<double>(a % cols - b % cols);
      d(a, b) = std::sqrt(dr * dr + dc * dc);
    }
  }
  return d;
}

MatrixXd feature_distances(const MatrixXd& features) {
  const Index n = features.rows();
  MatrixXd d(n, n);
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      d(a, b) = (features.row(a) - features.row(b)).norm();
    }
  }
  return d;
}

EnergySpec add_descriptor_term(const EnergySpec& e, const MatrixXd& c) {
  if (c.rows() != e.rows() || c.cols() != e.cols()) {
    throw DimensionError("add_descriptor_term: descriptor cost must be " + std::to_string(e.rows()) + "x" +
                         std::to_string(e.cols()));
  }
  if (!c.allFinite()) {
    throw InputError("add_descriptor_term: descriptor cost has non-finite entries");
  }
  return e.with_linear(e.linear() + stack(c));
}

void UserConstraints::validate(Index k, Index n) const {
  std::vector<char> src(k, 0), dst(n, 0);
  for (const auto& [s, t] : pairs) {
    if (s < 0 || s >= k || t < 0 || t >= n) {
      throw InputError("constraints: pair (" + std::to_string(s) + ", " + std::to_string(t) + ") out of range");
    }
    if (src[s] || dst[t]) {
      throw InfeasibleError("constraints: source " + std::to_string(s) + " or target " + std::to_string(t) +
                            " is pinned twice");
    }
    src[s] = dst[t] = 1;
  }
}

MatrixXd constraint_linear_term(const MetricData& m, const UserConstraints& u, const PairPenalty& p) {
  u.validate(m.k(), m.n());
  MatrixXd term = MatrixXd::Zero(m.k(), m.n());
  for (const auto& [s, t] : u.pairs) {
    term(s, t) -= 1.0;
    for (Index l = 0; l < m.n(); ++l) {
      for (Index q = 0; q < m.k(); ++q) {
        term(q, l) += p(m.source(s, q), m.target(t, l));
      }
    }
  }
  return term;
}

EnergySpec coarse_to_fine_terms(const MetricData& m, const UserConstraints& u, const EnergySpec& base) {
  return coarse_to_fine_terms(m, u, base, PairPenalty::log_gw(default_log_floor(m)));
}

EnergySpec coarse_to_fine_terms(const MetricData& m, const UserConstraints& u, const EnergySpec& base,
                                const PairPenalty& p) {
  if (base.rows() != m.k() || base.cols() != m.n()) {
    throw DimensionError("coarse_to_fine_terms: energy and metric sizes differ");
  }
  u.validate(m.k(), m.n());
  if (u.pairs.empty() || u.weight == 0.0) {
    return base;
  }
  double w = u.weight;
  if (w < 0.0) {
    const EigRange range = lambda_bar_range(base);
    w = 0.01 * std::max(std::abs(range.lambda_bar_min), std::abs(range.lambda_bar_max));
  }
  return base.with_linear(base.linear() + w * stack(constraint_linear_term(m, u, p)));
}

}  // namespace dspp
