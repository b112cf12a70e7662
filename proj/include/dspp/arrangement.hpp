#pragma once

#include "dspp/core.hpp"
#include "dspp/homotopy.hpp"

#include <cstdint>
#include <vector>

namespace dspp {

struct ArrangeOptions {
  Index rows = 0;
  Index cols = 0;
  Index swaps = 0;          // random transpositions tried after the homotopy
  std::uint64_t seed = 0;
  HomotopyConfig homotopy{};
};

struct Arrangement {
  Assignment assignment;    // item -> cell, cell (r, c) = r * cols + c
  std::vector<std::vector<int>> grid;  // grid[r][c] = item
  double energy = 0.0;
  double energy_before_swaps = 0.0;
  Index swaps_accepted = 0;
};

/// sum_{i,k} |s d_items(i,k) - d_grid(a_i, a_k)|, the grid layout energy of
/// an assignment with s the ratio of off-diagonal means.
double layout_energy(const MatrixXd& d_items, const MatrixXd& d_grid, const Assignment& a);

/// Tries `budget` random transpositions of two items and keeps those that
/// strictly lower the layout energy. Returns the number kept.
Index improve_by_swaps(const MatrixXd& d_items, const MatrixXd& d_grid, Assignment& a, Index budget,
                       std::uint64_t seed);

/// Lays out rows * cols items with pairwise dissimilarities d_items on the
/// grid. Throws DimensionError unless rows * cols equals the item count.
Arrangement arrange(const MatrixXd& d_items, const ArrangeOptions& opts);

}  // namespace dspp
