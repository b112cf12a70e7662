#pragma once

#include "dspp/core.hpp"
#include "dspp/energies.hpp"
#include "dspp/homotopy.hpp"

#include <utility>
#include <vector>

namespace dspp {

/// Marginals of the augmented (k + 1) x n injective polytope: a leading
/// slack row of mass n - k, unit rows below it, unit columns.
MarginalSpec injective_marginals(Index k, Index n);

/// Embeds a k x n energy (k < n) into the augmented (k + 1) x n polytope.
/// Coefficients touching the slack row are zero, so the augmented energy of
/// a vertex equals the original energy of its assignment.
Problem injective_problem(const EnergySpec& e);

/// Permutation problem for square energies, augmented injective problem
/// otherwise.
Problem matching_problem(const EnergySpec& e);

using Correspondences = std::vector<std::pair<int, int>>;  // (source, target)

struct SparsityPattern {
  Mask permissible;      // k x n
  VectorXd row_fraction; // permissible share of each row

  Index count() const { return permissible.count(); }
};

/// For every source point, the min(5, r) anchors nearest to it define a
/// distance signature; the keep_frac share of targets with the closest
/// signatures (at least one) is permissible. The same runs from the target
/// side and the two patterns are united. Throws InputError on an empty or
/// out-of-range anchor set.
SparsityPattern sparsity_pattern(const MetricData& fine, const Correspondences& anchors, double keep_frac = 0.2);

/// Restricts the pattern so that every anchor row and column permits only
/// its anchor partner.
void pin_anchors(SparsityPattern& pattern, const Correspondences& anchors);

/// Default penalty weight: 100 * max(|lambda_bar_min|, |lambda_bar_max|).
double default_rho(const EnergySpec& base, const EigOptions& eig = {});

/// base on the permissible entries plus rho * ||X_forbidden||_F^2; the
/// linear term is masked the same way. rho < 0 selects default_rho.
EnergySpec limited_support_energy(const EnergySpec& base, const SparsityPattern& pattern, double rho = -1.0);

/// For each query source, the unused target minimizing the energy of the
/// anchors plus that single pair under penalty p. Queries are solved
/// independently, so two queries may pick the same target. Ties go to the
/// smaller index. Throws InfeasibleError when no target is free.
std::vector<int> greedy_interpolate(const MetricData& m, const Correspondences& known,
                                    const std::vector<int>& queries, const PairPenalty& p);

enum class Provenance { anchor, solved, greedy };
const char* to_string(Provenance p);

struct UpsampleResult {
  Assignment assignment;
  std::vector<Provenance> provenance;
  double energy = 0.0;  // of the assignment under the fine energy (limited mode only)
};

/// Anchors keep their targets, every other source is interpolated greedily.
UpsampleResult upsample_greedy(const MetricData& fine, const Correspondences& anchors, const PairPenalty& p);

/// Solves the fine problem on a sparsity pattern built from the anchors,
/// with the anchors pinned.
UpsampleResult upsample_limited(const MetricData& fine, const Correspondences& anchors, const EnergySpec& fine_energy,
                                double keep_frac = 0.2, double rho = -1.0, const HomotopyConfig& cfg = {});

}  // namespace dspp
