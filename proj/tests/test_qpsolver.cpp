#include "dspp/qpsolver.hpp"
#include "dspp/spectral.hpp"

#include "fixtures.hpp"
#include "qp_oracle.hpp"

#include <doctest.h>

using namespace dspp;
using namespace dspp::testing;

namespace {

LinearMap dense_map(const MatrixXd& a) {
  return [a](const VectorXd& v) { return VectorXd(a * v); };
}

double oracle_minimum(const MatrixXd& h, const VectorXd& c, Index n) {
  const auto [a, b] = ds_constraints(n);
  return solve_convex_qp(h, c, a, b, VectorXd::Constant(n * n, 1.0 / static_cast<double>(n))).objective;
}

}  // namespace

TEST_SUITE("qpsolver") {

TEST_CASE("zero field keeps the start") {
  const auto m = MarginalSpec::doubly_stochastic(3);
  Rng rng(31);
  const Coupling start{random_doubly_stochastic(3, rng), m};
  const SolveResult r = solve_quadratic(dense_map(MatrixXd::Zero(9, 9)), VectorXd::Zero(9), m, start);
  CHECK((r.coupling.values - start.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.trace.converged);
}

TEST_CASE("linear objective on the 2x2 polytope reaches the identity") {
  const auto m = MarginalSpec::doubly_stochastic(2);
  const VectorXd c = stack((MatrixXd(2, 2) << 0, 1, 1, 0).finished());
  const SolveResult r = solve_quadratic(dense_map(MatrixXd::Zero(4, 4)), c, m, Coupling::uniform(m));
  CHECK((r.coupling.values - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("convex instances match the interior point oracle") {
  Rng rng(32);
  for (Index n : {3, 4, 5}) {
    const MatrixXd h = random_psd(n * n, rng);
    const VectorXd c = random_matrix(n * n, 1, rng);
    const auto m = MarginalSpec::doubly_stochastic(n);
    SolverConfig cfg;
    cfg.refine_levels = 2;
    const SolveResult r = solve_quadratic(dense_map(h), c, m, Coupling::uniform(m), cfg);
    const double expected = oracle_minimum(h, c, n);
    CHECK(r.trace.objective.back() == doctest::Approx(expected).epsilon(1e-4));
    CHECK(r.trace.max_marginal_error <= 1e-8);
  }
}

TEST_CASE("convex on the tangent space only") {
  Rng rng(33);
  const Index n = 3;
  const MatrixXd w = random_symmetric(n * n, rng);
  const EigRange range = lambda_bar_range(EnergySpec(n, n, QuadraticOperator::dense(w)));
  const MatrixXd h = w - range.lambda_bar_min * MatrixXd::Identity(n * n, n * n);
  const VectorXd c = random_matrix(n * n, 1, rng);
  const auto m = MarginalSpec::doubly_stochastic(n);
  SolverConfig cfg;
  cfg.refine_levels = 2;
  const SolveResult r = solve_quadratic(dense_map(h), c, m, Coupling::uniform(m), cfg);
  // Minimize over the reduced space x = x0 + F z in closed form.
  const MatrixXd f = [&] {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, n * n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        a(i, j * n + i) = 1.0;
        a(n + j, j * n + i) = 1.0;
      }
    Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeFullV);
    return MatrixXd(svd.matrixV().rightCols(n * n - (2 * n - 1)));
  }();
  const VectorXd x0 = VectorXd::Constant(n * n, 1.0 / n);
  // The interior minimizer is the polytope minimizer when it is nonnegative;
  // otherwise only the lower bound direction holds.
  const MatrixXd reduced = f.transpose() * h * f;
  const VectorXd z = reduced.ldlt().solve(-0.5 * f.transpose() * (2.0 * h * x0 + c));
  const VectorXd x = x0 + f * z;
  const double unconstrained = x.dot(h * x) + c.dot(x);
  CHECK(r.trace.objective.back() >= unconstrained - 1e-8);
  if (x.minCoeff() >= 0.0) {
    CHECK(r.trace.objective.back() == doctest::Approx(unconstrained).epsilon(1e-4));
  }
}

TEST_CASE("every iterate is feasible and the clamp is exact") {
  Rng rng(34);
  const Index n = 4;
  const MatrixXd h = random_psd(n * n, rng);
  const VectorXd c = random_matrix(n * n, 1, rng);
  const auto m = MarginalSpec::doubly_stochastic(n);
  const Coupling start = Coupling::uniform(m);
  SolverConfig cfg;
  cfg.sinkhorn.tol = 1e-10;
  const SolveResult r = solve_quadratic(dense_map(h), c, m, start, cfg);
  CHECK(r.trace.max_marginal_error <= 1e-8);
  REQUIRE(!r.trace.alpha.empty());
  const VectorXd g = 2.0 * h * start.stacked() + c;
  CHECK(r.trace.alpha.front() * cfg.exponent_cap == doctest::Approx(g.cwiseAbs().maxCoeff()));
  CHECK(r.trace.objective.size() == r.trace.alpha.size());
  for (std::size_t i = 6; i < r.trace.objective.size(); ++i) {
    CHECK(r.trace.objective[i] <= r.trace.objective[i - 1] + 1e-6);
  }
}

TEST_CASE("rectangular marginals") {
  Rng rng(35);
  const MarginalSpec m{(VectorXd(3) << 2, 1, 1).finished(), VectorXd::Ones(4)};
  const MatrixXd h = random_psd(12, rng);
  const SolveResult r =
      solve_quadratic(dense_map(h), VectorXd(random_matrix(12, 1, rng)), m, Coupling::uniform(m));
  CHECK(r.coupling.is_feasible());
}

TEST_CASE("invalid inputs") {
  const auto m = MarginalSpec::doubly_stochastic(2);
  const LinearMap zero = dense_map(MatrixXd::Zero(4, 4));
  CHECK_THROWS_AS(solve_quadratic(zero, VectorXd::Zero(4), m, Coupling{MatrixXd::Identity(2, 2) * 2.0, m}),
                  InfeasibleError);
  CHECK_THROWS_AS(solve_quadratic(zero, VectorXd::Zero(3), m, Coupling::uniform(m)), DimensionError);
  SolverConfig bad;
  bad.eta = 0.0;
  CHECK_THROWS_AS(solve_quadratic(zero, VectorXd::Zero(4), m, Coupling::uniform(m), bad), InputError);
  const LinearMap exploding = [](const VectorXd& v) {
    return VectorXd(v * std::numeric_limits<double>::infinity());
  };
  CHECK_THROWS_AS(solve_quadratic(exploding, VectorXd::Zero(4), m, Coupling::uniform(m)), SolverError);
}

}
