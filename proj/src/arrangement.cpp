#include "dspp/arrangement.hpp"

#include "dspp/energies.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace dspp {

namespace {

MatrixXd scaled_items(const MatrixXd& d_items, const MatrixXd& d_grid) {
  const double mean_items = mean_off_diagonal(d_items);
  if (!(mean_items > 0.0)) {
    throw InputError("arrange: item dissimilarities have zero mean");
  }
  return (mean_off_diagonal(d_grid) / mean_items) * d_items;
}

void check_sizes(const MatrixXd& d_items, const MatrixXd& d_grid, const Assignment& a) {
  if (d_items.rows() != d_items.cols() || d_grid.rows() != d_grid.cols() || d_items.rows() != d_grid.rows() ||
      static_cast<Index>(a.size()) != d_items.rows() || !a.is_permutation()) {
    throw DimensionError("layout: items, cells and assignment must agree in size");
  }
}

double layout_sum(const MatrixXd& s_items, const MatrixXd& d_grid, const Assignment& a) {
  double e = 0.0;
  const Index n = s_items.rows();
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < n; ++k) {
      e += std::abs(s_items(i, k) - d_grid(a.targets[i], a.targets[k]));
    }
  }
  return e;
}

}  // namespace

double layout_energy(const MatrixXd& d_items, const MatrixXd& d_grid, const Assignment& a) {
  check_sizes(d_items, d_grid, a);
  return layout_sum(scaled_items(d_items, d_grid), d_grid, a);
}

Index improve_by_swaps(const MatrixXd& d_items, const MatrixXd& d_grid, Assignment& a, Index budget,
                       std::uint64_t seed) {
  check_sizes(d_items, d_grid, a);
  const Index n = d_items.rows();
  if (budget <= 0 || n < 2) {
    return 0;
  }
  const MatrixXd s = scaled_items(d_items, d_grid);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> pick(0, n - 1);
  // Improvements below rounding level are not improvements.
  const double guard = 1e-12 * std::max(1.0, layout_sum(s, d_grid, a));
  Index accepted = 0;
  for (Index t = 0; t < budget; ++t) {
    const Index p = pick(rng);
    Index q = pick(rng);
    while (q == p) q = pick(rng);
    const int cp = a.targets[p];
    const int cq = a.targets[q];
    // Only pairs with exactly one of p, q change; each appears twice, so
    // the energy moves by 2 * delta.
    double delta = 0.0;
    for (Index k = 0; k < n; ++k) {
      if (k == p || k == q) continue;
      const int ck = a.targets[k];
      delta += std::abs(s(p, k) - d_grid(cq, ck)) + std::abs(s(q, k) - d_grid(cp, ck)) -
               std::abs(s(p, k) - d_grid(cp, ck)) - std::abs(s(q, k) - d_grid(cq, ck));
    }
    if (2.0 * delta < -guard) {
      std::swap(a.targets[p], a.targets[q]);
      ++accepted;
    }
  }
  return accepted;
}

Arrangement arrange(const MatrixXd& d_items, const ArrangeOptions& opts) {
  if (opts.rows < 1 || opts.cols < 1 || opts.rows * opts.cols != d_items.rows()) {
    throw DimensionError("arrange: a " + std::to_string(opts.rows) + "x" + std::to_string(opts.cols) +
                         " grid does not hold " + std::to_string(d_items.rows()) + " items");
  }
  if (d_items.rows() != d_items.cols()) {
    throw DimensionError("arrange: dissimilarity matrix must be square");
  }
  const MatrixXd d_grid = grid_distances(opts.rows, opts.cols);
  Arrangement out;
  const Index n = d_items.rows();
  if (n == 1) {
    out.assignment = Assignment::identity(1);
  } else {
    out.assignment = homotopy_solve(fried_energy(d_items, d_grid), opts.homotopy).assignment;
    out.energy_before_swaps = layout_energy(d_items, d_grid, out.assignment);
    out.swaps_accepted = improve_by_swaps(d_items, d_grid, out.assignment, opts.swaps, opts.seed);
    out.energy = out.swaps_accepted > 0 ? layout_energy(d_items, d_grid, out.assignment) : out.energy_before_swaps;
  }
  out.grid.assign(static_cast<std::size_t>(opts.rows), std::vector<int>(static_cast<std::size_t>(opts.cols), -1));
  for (Index item = 0; item < n; ++item) {
    const int cell = out.assignment.targets[item];
    out.grid[static_cast<std::size_t>(cell / opts.cols)][static_cast<std::size_t>(cell % opts.cols)] =
        static_cast<int>(item);
  }
  return out;
}

}  // namespace dspp
