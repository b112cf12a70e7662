#pragma once

#include "dspp/core.hpp"

#include <string>
#include <utility>
#include <vector>

namespace dspp {

/// Pairwise distances among k source and n target samples.
struct MetricData {
  MatrixXd source;  // k x k
  MatrixXd target;  // n x n

  Index k() const { return source.rows(); }
  Index n() const { return target.rows(); }
  double max_distance() const;
  /// Throws InputError unless both matrices are square, symmetric,
  /// nonnegative and zero on the diagonal (to 1e-12 of their scale).
  void validate() const;
};

/// Penalty p(u, v) on a source distance u against a target distance v.
struct PairPenalty {
  enum class Kind { squared, log_squared, gaussian, absolute };
  Kind kind = Kind::squared;
  double sigma = 0.2;  // gaussian width
  double floor = 0.0;  // log_squared: distances are clamped to at least this

  double operator()(double u, double v) const;

  static PairPenalty gw() { return {Kind::squared}; }
  static PairPenalty log_gw(double floor) { return {Kind::log_squared, 0.2, floor}; }
  static PairPenalty gaussian(double sigma) { return {Kind::gaussian, sigma}; }
  static PairPenalty absolute() { return {Kind::absolute}; }
};

/// How to store W.
enum class Form { automatic, dense, matrix_free };

/// W_{(i,j),(k,l)} = p(source(i,k), target(j,l)), c = 0, d = 0. The generic
/// matrix-free form costs O(k^2 n^2) per product.
EnergySpec pair_energy(const MetricData& m, const PairPenalty& p, Form form = Form::automatic);

/// p(u, v) = (u - v)^2. The matrix-free form costs O(k^2 n + k n^2).
EnergySpec gw_energy(const MetricData& m, Form form = Form::automatic);

/// Default floor for log_gw_energy: 1e-6 times the largest distance.
double default_log_floor(const MetricData& m);
/// p(u, v) = log(u / v)^2 with both distances clamped to at least eps_floor
/// (eps_floor <= 0 selects default_log_floor).
EnergySpec log_gw_energy(const MetricData& m, double eps_floor = 0.0, Form form = Form::automatic);

/// p(u, v) = -exp(-(u - v)^2 / sigma^2).
EnergySpec gaussian_energy(const MetricData& m, double sigma = 0.2, Form form = Form::automatic);

/// The metric energies selectable by name: "gw", "loggw", "gauss".
enum class MetricEnergy { gw, log_gw, gaussian };
/// Throws InputError for an unknown name.
MetricEnergy parse_metric_energy(const std::string& name);
EnergySpec metric_energy(const MetricData& m, MetricEnergy kind, double sigma = 0.2);
/// The pair penalty behind metric_energy, as used by greedy interpolation.
PairPenalty metric_penalty(const MetricData& m, MetricEnergy kind, double sigma = 0.2);

/// E(X) = ||A X - X B||_F^2 for n x n adjacency (or weight) matrices.
EnergySpec graph_matching_energy(const MatrixXd& a, const MatrixXd& b, Form form = Form::automatic);

/// Mean of the off-diagonal entries of a square matrix.
double mean_off_diagonal(const MatrixXd& d);

/// Grid layout energy: W_{(i,j),(k,l)} = |s d_images(i,k) - d_grid(j,l)|
/// with s matching the off-diagonal means of the two distance matrices.
EnergySpec fried_energy(const MatrixXd& d_images, const MatrixXd& d_grid, Form form = Form::automatic);

/// Euclidean distances between the integer cells of a rows x cols grid,
/// cell (r, c) having index r * cols + c.
MatrixXd grid_distances(Index rows, Index cols);

/// Euclidean distances between the rows of a feature matrix.
MatrixXd feature_distances(const MatrixXd& features);

/// Adds stack(C) to the linear term.
EnergySpec add_descriptor_term(const EnergySpec& e, const MatrixXd& c);

/// Known correspondences (source, target) with the weight of their term.
struct UserConstraints {
  std::vector<std::pair<int, int>> pairs;
  double weight = -1.0;  // negative: 0.01 * max(|lambda_bar_min|, |lambda_bar_max|) of the base

  /// InputError for out-of-range indices, InfeasibleError for a repeated
  /// source or target.
  void validate(Index k, Index n) const;
};

/// Linear term rewarding the pinned pairs and penalizing distortion of
/// distances to them:
///   L(X) = w [ -sum_i X(s_i, t_i) + sum_i sum_{k,l} p(d_S(s_i, k), d_T(t_i, l)) X(k, l) ].
MatrixXd constraint_linear_term(const MetricData& m, const UserConstraints& u, const PairPenalty& p);

/// base with L(X) added to its linear term; p defaults to the log-GW penalty.
EnergySpec coarse_to_fine_terms(const MetricData& m, const UserConstraints& u, const EnergySpec& base);
EnergySpec coarse_to_fine_terms(const MetricData& m, const UserConstraints& u, const EnergySpec& base,
                                const PairPenalty& p);

}  // namespace dspp
