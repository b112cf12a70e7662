#include "dspp/matching.hpp"

#include "dspp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dspp {

MarginalSpec injective_marginals(Index k, Index n) {
  if (k < 1 || k >= n) {
    throw DimensionError("injective_marginals: need 1 <= k < n, got k=" + std::to_string(k) +
                         ", n=" + std::to_string(n));
  }
  MarginalSpec m{VectorXd::Ones(k + 1), VectorXd::Ones(n)};
  m.rows(0) = static_cast<double>(n - k);
  return m;
}

Problem injective_problem(const EnergySpec& e) {
  const Index k = e.rows();
  const Index n = e.cols();
  MarginalSpec marginals = injective_marginals(k, n);
  // Stack index of (i, j) in the original and (i + 1, j) in the augmented layout.
  std::vector<Index> embed(k * n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < k; ++i) {
      embed[stack_index(i, j, k)] = stack_index(i + 1, j, k + 1);
    }
  }
  const Index dim = (k + 1) * n;
  QuadraticOperator w;
  if (const MatrixXd* dense = e.quadratic().dense_matrix()) {
    MatrixXd aug = MatrixXd::Zero(dim, dim);
    aug(embed, embed) = *dense;
    w = QuadraticOperator::dense(aug);
  } else {
    w = QuadraticOperator::matrix_free(dim, [base = e.quadratic(), embed, dim](const VectorXd& x) {
      VectorXd out = VectorXd::Zero(dim);
      out(embed) = base.apply(x(embed));
      return out;
    });
  }
  VectorXd c = VectorXd::Zero(dim);
  c(embed) = e.linear();
  return {EnergySpec(k + 1, n, std::move(w), std::move(c), e.constant()), std::move(marginals), 1};
}

Problem matching_problem(const EnergySpec& e) {
  return e.square() ? Problem::permutation(e) : injective_problem(e);
}

namespace {

void check_anchors(const Correspondences& anchors, Index k, Index n) {
  if (anchors.empty()) {
    throw InputError("sparsity_pattern: no anchors");
  }
  for (const auto& [s, t] : anchors) {
    if (s < 0 || s >= k || t < 0 || t >= n) {
      throw InputError("anchor (" + std::to_string(s) + ", " + std::to_string(t) + ") outside the fine sample set");
    }
  }
}

// Indices of the `count` smallest scores, ties to the smaller index.
std::vector<Index> smallest(const VectorXd& score, Index count) {
  std::vector<Index> order(score.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return score(a) < score(b); });
  order.resize(std::min<Index>(count, score.size()));
  return order;
}

// Anchor ids nearest to `point` under distance matrix d, whose anchor
// endpoints are given by `ends`.
std::vector<Index> nearest_anchors(const MatrixXd& d, Index point, const std::vector<int>& ends) {
  VectorXd dist(static_cast<Index>(ends.size()));
  for (std::size_t a = 0; a < ends.size(); ++a) dist(a) = d(point, ends[a]);
  return smallest(dist, 5);
}

}  // namespace

SparsityPattern sparsity_pattern(const MetricData& fine, const Correspondences& anchors, double keep_frac) {
  const Index k = fine.k();
  const Index n = fine.n();
  check_anchors(anchors, k, n);
  if (!(keep_frac > 0.0 && keep_frac <= 1.0)) {
    throw InputError("sparsity_pattern: keep fraction must lie in (0, 1]");
  }
  std::vector<int> src, dst;
  for (const auto& [s, t] : anchors) {
    src.push_back(s);
    dst.push_back(t);
  }
  SparsityPattern out;
  out.permissible = Mask::Constant(k, n, false);

  const Index keep_targets = std::max<Index>(1, static_cast<Index>(std::ceil(keep_frac * n - 1e-9)));
  for (Index i = 0; i < k; ++i) {
    const std::vector<Index> near = nearest_anchors(fine.source, i, src);
    VectorXd score(n);
    for (Index j = 0; j < n; ++j) {
      double s = 0.0;
      for (Index a : near) {
        const double diff = fine.source(i, src[a]) - fine.target(j, dst[a]);
        s += diff * diff;
      }
      score(j) = s;
    }
    for (Index j : smallest(score, keep_targets)) out.permissible(i, j) = true;
  }

  const Index keep_sources = std::max<Index>(1, static_cast<Index>(std::ceil(keep_frac * k - 1e-9)));
  for (Index j = 0; j < n; ++j) {
    const std::vector<Index> near = nearest_anchors(fine.target, j, dst);
    VectorXd score(k);
    for (Index i = 0; i < k; ++i) {
      double s = 0.0;
      for (Index a : near) {
        const double diff = fine.source(i, src[a]) - fine.target(j, dst[a]);
        s += diff * diff;
      }
      score(i) = s;
    }
    for (Index i : smallest(score, keep_sources)) out.permissible(i, j) = true;
  }
  out.row_fraction = out.permissible.cast<double>().rowwise().mean();
  return out;
}

void pin_anchors(SparsityPattern& pattern, const Correspondences& anchors) {
  Mask& m = pattern.permissible;
  check_anchors(anchors, m.rows(), m.cols());
  std::vector<char> anchor_col(m.cols(), 0);
  for (const auto& [s, t] : anchors) {
    m.row(s).setConstant(false);
    m.col(t).setConstant(false);
    anchor_col[t] = 1;
  }
  for (const auto& [s, t] : anchors) m(s, t) = true;
  // A row that only saw anchor columns falls back to every free column.
  for (Index i = 0; i < m.rows(); ++i) {
    if (!m.row(i).any()) {
      for (Index j = 0; j < m.cols(); ++j) m(i, j) = !anchor_col[j];
    }
  }
  pattern.row_fraction = m.cast<double>().rowwise().mean();
}

double default_rho(const EnergySpec& base, const EigOptions& eig) {
  const EigRange r = lambda_bar_range(base, eig);
  const double scale = std::max(std::abs(r.lambda_bar_min), std::abs(r.lambda_bar_max));
  return scale > 0.0 ? 100.0 * scale : 1.0;
}

EnergySpec limited_support_energy(const EnergySpec& base, const SparsityPattern& pattern, double rho) {
  if (pattern.permissible.rows() != base.rows() || pattern.permissible.cols() != base.cols()) {
    throw DimensionError("limited_support_energy: pattern does not match the energy size");
  }
  if (!pattern.permissible.rowwise().any().all()) {
    throw InputError("limited_support_energy: a row has no permissible entry");
  }
  if (rho < 0.0) {
    rho = default_rho(base);
  }
  if (!(rho > 0.0)) {
    throw InputError("limited_support_energy: rho must be positive");
  }
  const VectorXd mask = stack(pattern.permissible.cast<double>());
  return {base.rows(), base.cols(), QuadraticOperator::limited_support(base.quadratic(), pattern.permissible, rho),
          base.linear().cwiseProduct(mask), base.constant()};
}

std::vector<int> greedy_interpolate(const MetricData& m, const Correspondences& known,
                                    const std::vector<int>& queries, const PairPenalty& p) {
  const Index k = m.k();
  const Index n = m.n();
  std::vector<char> known_src(k, 0), used(n, 0);
  for (const auto& [s, t] : known) {
    if (s < 0 || s >= k || t < 0 || t >= n) {
      throw InputError("greedy_interpolate: known pair out of range");
    }
    known_src[s] = 1;
    used[t] = 1;
  }
  std::vector<int> out;
  out.reserve(queries.size());
  for (int q : queries) {
    if (q < 0 || q >= k || known_src[q]) {
      throw InputError("greedy_interpolate: query " + std::to_string(q) + " is out of range or already known");
    }
    int best = -1;
    double best_score = 0.0;
    for (Index t = 0; t < n; ++t) {
      if (used[t]) continue;
      double score = 0.0;
      for (const auto& [s, u] : known) score += p(m.source(q, s), m.target(t, u));
      if (best < 0 || score < best_score) {
        best = static_cast<int>(t);
        best_score = score;
      }
    }
    if (best < 0) {
      throw InfeasibleError("greedy_interpolate: every target is already matched");
    }
    out.push_back(best);
  }
  return out;
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::anchor:
      return "anchor";
    case Provenance::solved:
      return "solved";
    case Provenance::greedy:
      return "greedy";
  }
  return "";
}

UpsampleResult upsample_greedy(const MetricData& fine, const Correspondences& anchors, const PairPenalty& p) {
  check_anchors(anchors, fine.k(), fine.n());
  UpsampleResult out;
  out.assignment.targets.assign(fine.k(), -1);
  out.provenance.assign(fine.k(), Provenance::greedy);
  for (const auto& [s, t] : anchors) {
    out.assignment.targets[s] = t;
    out.provenance[s] = Provenance::anchor;
  }
  std::vector<int> queries;
  for (Index i = 0; i < fine.k(); ++i) {
    if (out.assignment.targets[i] < 0) queries.push_back(static_cast<int>(i));
  }
  const std::vector<int> found = greedy_interpolate(fine, anchors, queries, p);
  for (std::size_t q = 0; q < queries.size(); ++q) out.assignment.targets[queries[q]] = found[q];
  return out;
}

UpsampleResult upsample_limited(const MetricData& fine, const Correspondences& anchors, const EnergySpec& fine_energy,
                                double keep_frac, double rho, const HomotopyConfig& cfg) {
  if (fine_energy.rows() != fine.k() || fine_energy.cols() != fine.n()) {
    throw DimensionError("upsample_limited: energy does not match the fine metric");
  }
  SparsityPattern pattern = sparsity_pattern(fine, anchors, keep_frac);
  pin_anchors(pattern, anchors);
  const EnergySpec limited = limited_support_energy(fine_energy, pattern, rho);
  const HomotopyResult solved = homotopy_solve(matching_problem(limited), cfg);

  UpsampleResult out;
  out.assignment = solved.assignment;
  out.provenance.assign(fine.k(), Provenance::solved);
  for (const auto& [s, t] : anchors) out.provenance[s] = Provenance::anchor;
  out.energy = eval_energy(fine_energy, out.assignment);
  return out;
}

}  // namespace dspp
