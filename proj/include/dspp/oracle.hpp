#pragma once

#include "dspp/core.hpp"

#include <cstdint>

namespace dspp {

struct BruteForceResult {
  Assignment assignment;
  double value = 0.0;
  std::uint64_t enumerated = 0;
};

/// Largest number of complete assignments the enumerators accept.
inline constexpr std::uint64_t kBruteForceLimit = 4'000'000;

/// Exact minimum of E over all injective maps of the k rows into the n
/// columns, by depth-first enumeration in lexicographic order with
/// incremental energy updates. The lexicographically first minimizer wins
/// ties. Throws InputError when the count exceeds kBruteForceLimit
/// (n = 10 for permutations).
BruteForceResult brute_force_injective(const EnergySpec& e);

/// Square case of brute_force_injective.
BruteForceResult brute_force_min(const EnergySpec& e);

/// Number of injective maps from k rows into n columns, saturating.
std::uint64_t injection_count(Index k, Index n);

/// Row and column sum constraints on the stacked k x n variables.
MatrixXd marginal_constraint_matrix(Index k, Index n);

/// Orthonormal basis of the null space of marginal_constraint_matrix.
MatrixXd tangent_basis(Index k, Index n);

struct DenseRange {
  double lambda_bar_min = 0.0;
  double lambda_bar_max = 0.0;
};

/// Extreme eigenvalues of F^T W F with F = tangent_basis, by dense
/// eigendecomposition. Throws InputError when k * n > 100.
DenseRange dense_subspace_eigs(const EnergySpec& e);

}  // namespace dspp
