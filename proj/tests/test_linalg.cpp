#include <doctest.h>

#include <random>

#include "dsse/linalg.hpp"

using namespace dsse;
using linalg::KktSystem;
using linalg::solve_kkt;
using linalg::solve_linear;

namespace {

DenseMatrix random_matrix(std::mt19937_64& rng, Index rows, Index cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

DenseVector random_vector(std::mt19937_64& rng, Index n) {
  return random_matrix(rng, n, 1);
}

// Minimizes the equality-constrained quadratic by eliminating the constraints
// through an explicit null-space basis.
DenseVector eliminate(const KktSystem<double>& sys) {
  const DenseMatrix& h = sys.hessian;
  const DenseMatrix& j = sys.constraints;
  const DenseVector particular =
      j.completeOrthogonalDecomposition().solve(DenseVector(-sys.constraint_residual));
  Eigen::FullPivLU<DenseMatrix> lu(j);
  const DenseMatrix z = lu.kernel();
  const DenseMatrix reduced = z.transpose() * h * z;
  const DenseVector rhs = -z.transpose() * (h * particular + sys.gradient);
  return particular + z * reduced.ldlt().solve(rhs);
}

}  // namespace

TEST_CASE("solve_linear on identity and diagonal systems") {
  const DenseVector x = solve_linear(DenseMatrix::Identity(3, 3), DenseVector{{1.0, 2.0, 3.0}});
  CHECK(x.isApprox(DenseVector{{1.0, 2.0, 3.0}}));

  DenseMatrix d{{2.0, 0.0}, {0.0, 4.0}};
  const DenseVector y = solve_linear(d, DenseVector{{2.0, 8.0}});
  CHECK(y(0) == doctest::Approx(1.0));
  CHECK(y(1) == doctest::Approx(2.0));
}

TEST_CASE("solve_linear residual bound on random systems") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    DenseMatrix a = random_matrix(rng, 20, 20) + 5.0 * DenseMatrix::Identity(20, 20);
    const DenseVector rhs = random_vector(rng, 20) * 100.0;
    const DenseVector x = solve_linear(a, rhs);
    CHECK(linalg::max_abs(DenseVector(a * x - rhs)) <= 1e-9 * (1.0 + linalg::max_abs(rhs)));
  }
}

TEST_CASE("solve_linear handles symmetric indefinite matrices") {
  DenseMatrix a{{0.0, 1.0}, {1.0, 0.0}};
  const DenseVector x = solve_linear(a, DenseVector{{3.0, 4.0}});
  CHECK(x(0) == doctest::Approx(4.0));
  CHECK(x(1) == doctest::Approx(3.0));
}

TEST_CASE("solve_linear errors") {
  DenseMatrix singular{{1.0, 2.0}, {2.0, 4.0}};
  CHECK_THROWS_AS(solve_linear(singular, DenseVector{{1.0, 1.0}}), SingularMatrix);
  CHECK_THROWS_AS(solve_linear(DenseMatrix(2, 3), DenseVector(2)), DimensionMismatch);
  CHECK_THROWS_AS(solve_linear(DenseMatrix::Identity(2, 2), DenseVector(3)), DimensionMismatch);
}

TEST_CASE("solve_kkt projects onto a single constraint") {
  KktSystem<double> sys{DenseMatrix::Identity(2, 2), DenseMatrix{{1.0, 0.0}}, DenseVector::Zero(2),
                        DenseVector{{-1.0}}};
  const auto sol = solve_kkt(sys);
  CHECK(sol.primal_step(0) == doctest::Approx(1.0));
  CHECK(sol.primal_step(1) == doctest::Approx(0.0));
  // H dx + J' mu = 0 with dx = (1, 0) forces mu = -1.
  CHECK(sol.multipliers(0) == doctest::Approx(-1.0));
  CHECK_FALSE(sol.regularized);
}

TEST_CASE("solve_kkt three by three hand example") {
  KktSystem<double> sys{2.0 * DenseMatrix::Identity(2, 2), DenseMatrix{{1.0, 1.0}},
                        DenseVector{{2.0, 0.0}}, DenseVector{{0.0}}};
  const auto sol = solve_kkt(sys);
  CHECK(sol.primal_step(0) == doctest::Approx(-0.5));
  CHECK(sol.primal_step(1) == doctest::Approx(0.5));
  CHECK(sol.multipliers(0) == doctest::Approx(-1.0));
}

TEST_CASE("solve_kkt returns a zero step at a stationary feasible point") {
  std::mt19937_64 rng(5);
  const DenseMatrix j = random_matrix(rng, 2, 5);
  const DenseVector mu = random_vector(rng, 2);
  KktSystem<double> sys{DenseMatrix::Identity(5, 5), j, DenseVector(-j.transpose() * mu),
                        DenseVector::Zero(2)};
  const auto sol = solve_kkt(sys);
  CHECK(linalg::max_abs(sol.primal_step) <= 1e-12);
  CHECK(linalg::max_abs(DenseVector(sol.multipliers - mu)) <= 1e-12);
}

TEST_CASE("solve_kkt agrees with brute-force elimination") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 2 + trial % 5;   // 2..6 variables
    const Index m = 1 + trial % (n - 1);
    const DenseMatrix root = random_matrix(rng, n, n);
    KktSystem<double> sys{root.transpose() * root + 0.1 * DenseMatrix::Identity(n, n),
                          random_matrix(rng, m, n), random_vector(rng, n), random_vector(rng, m)};
    const auto sol = solve_kkt(sys);
    const DenseVector stat = sys.hessian * sol.primal_step +
                             sys.constraints.transpose() * sol.multipliers + sys.gradient;
    const DenseVector feas = sys.constraints * sol.primal_step + sys.constraint_residual;
    CHECK(linalg::max_abs(stat) <= 1e-8);
    CHECK(linalg::max_abs(feas) <= 1e-8);
    CHECK(linalg::max_abs(DenseVector(sol.primal_step - eliminate(sys))) <= 1e-8);
  }
}

TEST_CASE("solve_kkt with singular Hessian but positive on the null space") {
  // H is rank one; J pins the direction H does not see.
  KktSystem<double> sys{DenseMatrix{{1.0, 0.0}, {0.0, 0.0}}, DenseMatrix{{0.0, 1.0}},
                        DenseVector{{1.0, 0.0}}, DenseVector{{-2.0}}};
  const auto sol = solve_kkt(sys);
  CHECK(sol.primal_step(0) == doctest::Approx(-1.0));
  CHECK(sol.primal_step(1) == doctest::Approx(2.0));
}

TEST_CASE("solve_kkt with badly scaled blocks") {
  std::mt19937_64 rng(3);
  const DenseMatrix root = random_matrix(rng, 8, 8);
  KktSystem<double> sys{1e9 * (root.transpose() * root), random_matrix(rng, 3, 8),
                        1e6 * random_vector(rng, 8), random_vector(rng, 3)};
  const auto sol = solve_kkt(sys);
  const DenseVector feas = sys.constraints * sol.primal_step + sys.constraint_residual;
  const DenseVector stat = sys.hessian * sol.primal_step +
                           sys.constraints.transpose() * sol.multipliers + sys.gradient;
  CHECK(linalg::max_abs(feas) <= 1e-8);
  CHECK(linalg::max_abs(stat) <= 1e-8 * linalg::max_abs(sys.gradient));
}

TEST_CASE("solve_kkt rank-deficient constraints") {
  KktSystem<double> sys{DenseMatrix::Identity(2, 2), DenseMatrix{{1.0, 1.0}, {2.0, 2.0}},
                        DenseVector::Zero(2), DenseVector{{1.0, 0.0}}};
  CHECK_THROWS_AS(solve_kkt(sys), SingularKkt);
}

TEST_CASE("solve_kkt rejects asymmetric or non-conforming blocks") {
  KktSystem<double> asym{DenseMatrix{{1.0, 2.0}, {0.0, 1.0}}, DenseMatrix{{1.0, 0.0}},
                         DenseVector::Zero(2), DenseVector::Zero(1)};
  CHECK_THROWS_AS(solve_kkt(asym), ValidationError);
  KktSystem<double> bad{DenseMatrix::Identity(2, 2), DenseMatrix{{1.0, 0.0, 0.0}},
                        DenseVector::Zero(2), DenseVector::Zero(1)};
  CHECK_THROWS_AS(solve_kkt(bad), DimensionMismatch);
}
