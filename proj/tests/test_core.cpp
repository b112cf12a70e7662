#include "dspp/core.hpp"

#include "fixtures.hpp"

#include <doctest.h>

using namespace dspp;
using namespace dspp::testing;

TEST_SUITE("core") {

TEST_CASE("stack is column-major") {
  const MatrixXd id = MatrixXd::Identity(2, 2);
  CHECK(stack(id) == (VectorXd(4) << 1, 0, 0, 1).finished());

  MatrixXd x = MatrixXd::Zero(2, 2);
  x(1, 0) = 1.0;
  CHECK(stack(x) == (VectorXd(4) << 0, 1, 0, 0).finished());
  CHECK(stack_index(1, 0, 2) == 1);
}

TEST_CASE("stack and unstack round-trip") {
  Rng rng(1);
  const MatrixXd x = random_matrix(5, 7, rng);
  CHECK(unstack(stack(x), 5, 7) == x);
  const VectorXd v = stack(x);
  CHECK(stack(unstack(v, 5, 7)) == v);
  CHECK_THROWS_AS(unstack(v, 6, 6), DimensionError);
}

TEST_CASE("constant energy") {
  const EnergySpec e(3, 3, QuadraticOperator::zero(9), VectorXd::Zero(9), 5.0);
  Rng rng(2);
  CHECK(eval_energy(e, VectorXd(random_matrix(9, 1, rng))) == doctest::Approx(5.0));
}

TEST_CASE("identity W on a permutation gives n") {
  const EnergySpec e(3, 3, QuadraticOperator::dense(MatrixXd::Identity(9, 9)));
  CHECK(eval_energy(e, Assignment::identity(3)) == doctest::Approx(3.0));
}

TEST_CASE("energy matches naive double loop") {
  Rng rng(3);
  const MatrixXd w = random_symmetric(16, rng);
  const VectorXd c = random_matrix(16, 1, rng);
  const EnergySpec e(4, 4, QuadraticOperator::dense(w), c, 0.75);
  const VectorXd x = random_matrix(16, 1, rng);
  double naive = 0.75;
  for (Index p = 0; p < 16; ++p) {
    naive += c(p) * x(p);
    for (Index q = 0; q < 16; ++q) naive += w(p, q) * x(p) * x(q);
  }
  CHECK(eval_energy(e, x) == doctest::Approx(naive).epsilon(1e-12));
  CHECK_THROWS_AS(eval_energy(e, VectorXd::Zero(15)), DimensionError);
}

TEST_CASE("dense operator is symmetrized") {
  Rng rng(4);
  const MatrixXd a = random_matrix(6, 6, rng);
  const QuadraticOperator q = QuadraticOperator::dense(a);
  const VectorXd u = random_matrix(6, 1, rng);
  const VectorXd v = random_matrix(6, 1, rng);
  CHECK(u.dot(q.apply(v)) == doctest::Approx(v.dot(q.apply(u))).epsilon(1e-12));
  CHECK((*q.dense_matrix() - 0.5 * (a + a.transpose())).norm() < 1e-14);
}

TEST_CASE("matrix-free and dense variants agree") {
  Rng rng(5);
  const MatrixXd w = random_symmetric(9, rng);
  const EnergySpec dense(3, 3, QuadraticOperator::dense(w));
  const EnergySpec free(3, 3, QuadraticOperator::matrix_free(9, [w](const VectorXd& x) { return VectorXd(w * x); }));
  for (int t = 0; t < 20; ++t) {
    const VectorXd x = random_matrix(9, 1, rng);
    CHECK(eval_energy(free, x) == doctest::Approx(eval_energy(dense, x)).epsilon(1e-10));
  }
  CHECK((free.quadratic().to_dense() - w).norm() < 1e-12);
}

TEST_CASE("shifted energy on the uniform matrix") {
  const EnergySpec e(3, 3, QuadraticOperator::zero(9));
  const VectorXd uniform = VectorXd::Constant(9, 1.0 / 3.0);
  CHECK(eval_shifted(e, uniform, 1.0) == doctest::Approx(2.0));
}

TEST_CASE("shifted energy equals energy on permutations") {
  Rng rng(6);
  const EnergySpec e = random_energy(4, rng);
  for (int t = 0; t < 10; ++t) {
    Assignment p{random_permutation(4, rng)};
    const double a = std::uniform_real_distribution<double>(-10, 10)(rng);
    CHECK(eval_shifted(e, p.to_stack(4), a) == doctest::Approx(eval_energy(e, p)).epsilon(1e-12));
  }
}

TEST_CASE("shifted energy is monotone in the shift on DS matrices") {
  Rng rng(7);
  const EnergySpec e = random_energy(4, rng);
  for (int t = 0; t < 50; ++t) {
    const VectorXd x = stack(random_doubly_stochastic(4, rng));
    const double a = std::uniform_real_distribution<double>(-5, 5)(rng);
    const double b = a + std::uniform_real_distribution<double>(0.01, 5)(rng);
    CHECK(eval_shifted(e, x, a) <= eval_shifted(e, x, b) + 1e-12);
  }
}

TEST_CASE("energy spec rejects bad shapes") {
  CHECK_THROWS_AS(EnergySpec(4, 3, QuadraticOperator::zero(12)), DimensionError);
  CHECK_THROWS_AS(EnergySpec(2, 3, QuadraticOperator::zero(5)), DimensionError);
  CHECK_THROWS_AS(EnergySpec(2, 3, QuadraticOperator::zero(6), VectorXd::Zero(5)), DimensionError);
}

TEST_CASE("assignments") {
  const Assignment p{{1, 0, 2}};
  CHECK(p.is_permutation());
  CHECK(p.to_matrix(3)(0, 1) == 1.0);
  CHECK(p.to_stack(3).squaredNorm() == 3.0);
  CHECK_FALSE(Assignment{{0, 0}}.is_injective(3));
  CHECK(Assignment{{2, 0}}.is_injective(3));
  CHECK_FALSE(Assignment{{3}}.is_injective(3));
}

TEST_CASE("couplings and marginals") {
  const MarginalSpec m{(VectorXd(3) << 2, 1, 1).finished(), VectorXd::Ones(4)};
  m.validate();
  const Coupling u = Coupling::uniform(m);
  CHECK(u.is_feasible());
  CHECK(u.values(0, 0) == doctest::Approx(0.5));
  CHECK_THROWS_AS((MarginalSpec{VectorXd::Ones(3), VectorXd::Ones(4)}.validate()), InfeasibleError);
  CHECK_THROWS_AS((MarginalSpec{(VectorXd(2) << 2, 0).finished(), VectorXd::Ones(2)}.validate()), InfeasibleError);
  CHECK(is_integral(Assignment::identity(3).to_matrix(3)));
  CHECK_FALSE(is_integral(u.values));
}

}
