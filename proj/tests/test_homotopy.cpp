#include "dspp/energies.hpp"
#include "dspp/homotopy.hpp"
#include "dspp/oracle.hpp"
#include "dspp/projection.hpp"

#include "fixtures.hpp"
#include "qp_oracle.hpp"

#include <doctest.h>

#include <limits>

using namespace dspp;
using namespace dspp::testing;

namespace {

double scale_of(const BoundReport& r) { return std::max(1.0, std::abs(r.upper)); }

}  // namespace

TEST_SUITE("dspp") {

TEST_CASE("samples are uniform and include both ends") {
  const std::vector<double> s = homotopy_samples(-3.0, 1.5, 10);
  REQUIRE(s.size() == 10);
  CHECK(s.front() == -3.0);
  CHECK(s.back() == 1.5);
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] - s[i - 1] == doctest::Approx(0.5));
  CHECK(homotopy_samples(2.0, 2.0, 10) == std::vector<double>{2.0});
  CHECK_THROWS_AS(homotopy_samples(1.0, 0.0, 3), InputError);
}

TEST_CASE("constant energy") {
  const EnergySpec e = EnergySpec{3, 3, QuadraticOperator::zero(9)}.with_constant(7.0);
  const RelaxResult r = relax_convex(e);
  CHECK(r.objective == doctest::Approx(7.0));
  CHECK(r.coupling.is_feasible());
  CHECK(homotopy_solve(e).energy == doctest::Approx(7.0));
}

TEST_CASE("concave 2x2 toy picks the better corner") {
  const VectorXd c = stack((MatrixXd(2, 2) << 0, 0.3, 0.3, 0).finished());
  const EnergySpec e{2, 2, QuadraticOperator::dense(-MatrixXd::Identity(4, 4)), c};
  const HomotopyResult h = homotopy_solve(e);
  CHECK(h.assignment == Assignment::identity(2));
  CHECK(h.energy == doctest::Approx(-2.0));
}

TEST_CASE("convex bound sits between DS+ and the true minimum") {
  Rng rng(71);
  for (int trial = 0; trial < 6; ++trial) {
    const Index n = 4 + trial % 3;
    const EnergySpec e = random_energy(n, rng);
    const double lambda_min = lambda_min_full(e);
    SolverConfig cfg;
    cfg.refine_levels = 2;
    const double ds_plus = relax_at(Problem::permutation(e), lambda_min, cfg).objective;
    const RelaxResult r = relax_convex(e);
    const double best = brute_force_min(e).value;
    const double scale = std::max(1.0, std::abs(best));
    CHECK(r.objective <= best + 1e-6 * scale);
    CHECK(r.objective >= ds_plus - 1e-4 * scale);
    CHECK(r.dual_bound <= r.objective + 1e-9 * scale);
    CHECK(r.dual_bound <= best + 1e-9 * scale);
  }
}

TEST_CASE("warm starts carry the previous coupling") {
  Rng rng(72);
  const Problem p = Problem::permutation(random_energy(4, rng));
  HomotopyConfig cfg;
  cfg.num_samples = 2;
  const HomotopyResult h = homotopy_solve(p, cfg);
  REQUIRE(h.stages.size() == 2);
  CHECK(h.stages[0].a == h.range.lambda_bar_min);
  CHECK(h.stages[1].a == h.range.lambda_bar_max);
  CHECK(h.stages[1].initial_objective ==
        doctest::Approx(eval_shifted(p.energy, h.convex.stacked(), h.stages[1].a, p.mass())).epsilon(1e-14));
  CHECK(h.lower_bound == h.stages[0].final_objective);
  CHECK(h.assignment.is_permutation());
  CHECK(h.energy == doctest::Approx(eval_energy(p.energy, h.assignment)));
}

TEST_CASE("the concave end is nearly integral") {
  Rng rng(73);
  int integral = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const HomotopyResult h = homotopy_solve(random_energy(5, rng));
    integral += h.stages.back().integrality < 0.1;
  }
  CHECK(integral >= 9);
}

TEST_CASE("homotopy improves on projecting the convex solution") {
  Rng rng(74);
  double path = 0.0;
  double direct = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const EnergySpec e = random_energy(5, rng);
    const HomotopyResult h = homotopy_solve(e);
    path += h.energy;
    direct += eval_energy(e, l2_project(h.convex));
  }
  CHECK(path <= direct);
}

TEST_CASE("equal shifts run a single stage") {
  Rng rng(75);
  HomotopyConfig cfg;
  cfg.a_lo = 0.5;
  cfg.a_hi = 0.5;
  const HomotopyResult h = homotopy_solve(random_energy(4, rng), cfg);
  CHECK(h.stages.size() == 1);
  CHECK(h.assignment.is_permutation());
}

TEST_CASE("symmetric instances leave the uniform stationary point") {
  // Every cell of a 2x2 grid sees the same distances, so the uniform
  // coupling is stationary for every stage.
  Rng rng(112);
  int escaped = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const EnergySpec e = fried_energy(point_distances(random_matrix(4, 3, rng)), grid_distances(2, 2));
    const HomotopyResult h = homotopy_solve(e);
    CHECK(h.energy == doctest::Approx(brute_force_min(e).value).epsilon(1e-9));
    escaped += h.escaped;
  }
  CHECK(escaped > 0);
}

TEST_CASE("fuzzy mode on a convex energy is the convex optimum") {
  Rng rng(76);
  const Index n = 4;
  const MatrixXd w = random_psd(n * n, rng);
  const VectorXd c = random_matrix(n * n, 1, rng);
  const EnergySpec e{n, n, QuadraticOperator::dense(w), c};
  HomotopyConfig cfg;
  cfg.solver.refine_levels = 2;
  const HomotopyResult f = fuzzy_solve(e, cfg);
  CHECK(f.stages.size() == 1);
  CHECK(f.relaxed.marginal_error() <= 1e-8);
  const auto [a, b] = ds_constraints(n);
  const double expected = solve_convex_qp(w, c, a, b, VectorXd::Constant(n * n, 0.25)).objective;
  CHECK(f.energy == doctest::Approx(expected).epsilon(1e-4));
}

TEST_CASE("fuzzy mode reaches a good local minimum") {
  Rng rng(77);
  const EnergySpec e = random_energy(4, rng);
  const HomotopyResult f = fuzzy_solve(e);
  CHECK(f.relaxed.marginal_error() <= 1e-8);
  CHECK(f.stages.back().a == 0.0);
  double best_local = std::numeric_limits<double>::infinity();
  const Problem p = Problem::permutation(e);
  for (int t = 0; t < 20; ++t) {
    const Coupling start{random_doubly_stochastic(4, rng), p.marginals};
    best_local = std::min(best_local, relax_at(p, 0.0, {}, &start).objective);
  }
  CHECK(f.energy <= best_local + 1e-6 * std::max(1.0, std::abs(best_local)));
}

TEST_CASE("identity quadratic") {
  const EnergySpec e{3, 3, QuadraticOperator::dense(MatrixXd::Identity(9, 9))};
  const BoundReport r = bound_hierarchy(e);
  REQUIRE(r.spectral);
  REQUIRE(r.ds);
  CHECK(*r.spectral == doctest::Approx(3.0));
  CHECK(r.ds_plus == doctest::Approx(3.0));
  CHECK(r.ds_pp == doctest::Approx(3.0));
  CHECK(r.upper == doctest::Approx(3.0));
  // The unshifted relaxation reaches the uniform matrix.
  CHECK(*r.ds == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("bound chain on nonconvex instances") {
  Rng rng(78);
  for (int trial = 0; trial < 4; ++trial) {
    const EnergySpec e = random_energy(4 + trial % 2, rng);
    const BoundReport r = bound_hierarchy(e);
    const double best = brute_force_min(e).value;
    const double slack = 1e-4 * scale_of(r);
    REQUIRE(r.spectral);
    CHECK_FALSE(r.ds);
    CHECK(*r.spectral <= r.ds_plus + slack);
    CHECK(r.ds_plus <= r.ds_pp + slack);
    CHECK(r.ds_pp <= best + slack);
    CHECK(r.ds_pp_certified <= best + 1e-9 * scale_of(r));
    CHECK(best <= r.upper + 1e-9 * scale_of(r));
  }
}

TEST_CASE("bound chain on convex instances") {
  Rng rng(79);
  const EnergySpec e = random_energy(4, rng, true);
  const BoundReport r = bound_hierarchy(e);
  REQUIRE(r.ds);
  const double slack = 1e-4 * scale_of(r);
  CHECK(*r.spectral <= *r.ds + slack);
  CHECK(*r.ds <= r.ds_pp + slack);
  CHECK(r.ds_pp <= r.upper + slack);
}

TEST_CASE("config validation") {
  HomotopyConfig cfg;
  cfg.num_samples = 0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg.num_samples = 3;
  cfg.a_lo = 1.0;
  cfg.a_hi = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  Rng rng(80);
  CHECK_THROWS_AS(homotopy_solve(EnergySpec{2, 3, QuadraticOperator::zero(6)}), DimensionError);
}

}
