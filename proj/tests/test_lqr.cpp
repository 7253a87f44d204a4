#include <cmath>

#include "doctest.h"
#include "lts/errors.hpp"
#include "lts/policy_gradient.hpp"

using namespace lts;

namespace {

double scalar(const Matrix& m) { return m(0, 0); }

Matrix mat1(double v) { return Matrix::Constant(1, 1, v); }

// Independent scalar DARE root: bisection on p = q + a^2 p - a^2 b^2 p^2 / (r + b^2 p).
double scalar_dare_root(double a, double b, double q, double r) {
  auto f = [&](double p) { return q + a * a * p - a * a * b * b * p * p / (r + b * b * p) - p; };
  double lo = q, hi = 1e6;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("solve_lyapunov examples") {
  const Matrix w = (Matrix(2, 2) << 2, 1, 1, 3).finished();
  CHECK((solve_lyapunov(Matrix::Zero(2, 2), w).p - w).norm() == 0.0);
  CHECK(scalar(solve_lyapunov(mat1(0.5), mat1(1.0)).p) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK_THROWS_AS(solve_lyapunov(mat1(1.0), mat1(1.0)), InstabilityError);
  CHECK_THROWS_AS(solve_lyapunov(Matrix::Zero(2, 2), mat1(1.0)), DimensionError);
}

TEST_CASE("solve_lyapunov residual on random stable matrices") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix m(5, 5);
    for (Index i = 0; i < 5; ++i)
      for (Index j = 0; j < 5; ++j) m(i, j) = rng.normal();
    m *= 0.95 / spectral_radius(m);
    const Matrix w = Matrix::Identity(5, 5);
    const LyapunovSolution sol = solve_lyapunov(m, w);
    const Matrix resid = sol.p - w - m.transpose() * sol.p * m;
    CHECK(resid.norm() <= 1e-10 * sol.p.norm());
  }
}

TEST_CASE("exact_cost of the zero controller on a stable plant") {
  const Matrix a = (Matrix(2, 2) << 0.5, 0.2, -0.1, 0.3).finished();
  const LtiSystem sys(a, Matrix::Ones(2, 1));
  const CostMatrices costs = CostMatrices::scaled_identity(2, 1);
  Matrix series = Matrix::Zero(2, 2), power = Matrix::Identity(2, 2);
  for (int t = 0; t < 200; ++t) {
    series += power.transpose() * power;
    power = a * power;
  }
  CHECK(exact_cost(sys, Matrix::Zero(1, 2), 1.0, costs) ==
        doctest::Approx(series.trace()).epsilon(1e-12));
}

TEST_CASE("scalar deadbeat cost") {
  const LtiSystem sys(mat1(2.0), mat1(1.0));
  const CostMatrices costs = CostMatrices::scaled_identity(1, 1);
  CHECK(exact_cost(sys, mat1(-2.0), mat1(1.0), 1.0, costs) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK_THROWS_AS(exact_cost(sys, mat1(0.0), 1.0, costs), InstabilityError);
}

TEST_CASE("exact_cost matches rollout averages") {
  const LtiSystem sys = build_pendulum();
  SystemOracle oracle(sys);
  const CostMatrices costs = CostMatrices::scaled_identity(2, 1);
  const SubspaceEstimate basis = SubspaceEstimate::identity(2);
  const double gamma = 0.2;  // < 1 / rho(A)^2
  EstimationParams params;
  params.cost_rollouts = 10000;
  params.horizon = 500;
  Rng rng(5);
  const double mc = estimate_cost(oracle, LowDimController(Matrix::Zero(1, 2), basis), gamma,
                                  params, costs, rng);
  const double exact = exact_cost(sys, Matrix::Zero(1, 2), gamma, costs);
  CHECK(std::abs(mc - exact) <= 0.01 * exact);
}

TEST_CASE("scalar gradient in closed form") {
  // a = 0, b = 1, q = r = 1, gamma = 1: J(theta) = (1 + theta^2) / (1 - theta^2).
  const LtiSystem sys(mat1(0.0), mat1(1.0));
  const CostMatrices costs = CostMatrices::scaled_identity(1, 1);
  const Matrix phi = mat1(1.0);
  CHECK(std::abs(scalar(exact_gradient(sys, mat1(0.0), phi, 1.0, costs))) <= 1e-15);
  CHECK(scalar(exact_gradient(sys, mat1(0.5), phi, 1.0, costs)) ==
        doctest::Approx(32.0 / 9.0).epsilon(1e-12));
  CHECK(exact_cost(sys, mat1(0.5), phi, 1.0, costs) == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("solve_dare examples") {
  LqrProblem zero{Matrix::Zero(2, 2), Matrix::Ones(2, 1), Matrix::Identity(2, 2), mat1(1.0)};
  const DareSolution z = solve_dare(zero, 1.0);
  CHECK((z.p - zero.q).norm() <= 1e-14);
  CHECK(z.k.norm() <= 1e-14);

  LqrProblem s{mat1(2.0), mat1(1.0), mat1(1.0), mat1(1.0)};
  const DareSolution d = solve_dare(s, 1.0);
  const double p = scalar_dare_root(2.0, 1.0, 1.0, 1.0);
  CHECK(scalar(d.p) == doctest::Approx(p).epsilon(1e-10));
  CHECK(scalar(d.p) == doctest::Approx(2.0 + std::sqrt(5.0)).epsilon(1e-10));
  CHECK(scalar(d.k) == doctest::Approx(-2.0 * p / (1.0 + p)).epsilon(1e-10));

  LqrProblem unreachable{mat1(2.0), mat1(0.0), mat1(1.0), mat1(1.0)};
  CHECK_THROWS_AS(solve_dare(unreachable, 1.0), FeasibilityError);
}

TEST_CASE("gradient vanishes at the Riccati optimum") {
  const LtiSystem sys = augment_system(build_pendulum(), 20, 4);
  const CostMatrices costs = CostMatrices::scaled_identity(20, 1, 1.0, 0.01);
  const Matrix phi = true_left_unstable_basis(sys.a());
  for (double gamma : {0.5, 0.9, 1.0}) {
    const DareSolution opt = solve_dare(LqrProblem::projected(sys, phi, costs), gamma);
    CHECK(exact_gradient(sys, opt.k, phi, gamma, costs).norm() <= 1e-8);
  }
}

TEST_CASE("Riccati optimum is not beaten by random stabilizing gains") {
  const LtiSystem sys = augment_system(build_cartpole(), 12, 9);
  const CostMatrices costs = CostMatrices::scaled_identity(12, 1, 1.0, 0.01);
  const Matrix phi = true_left_unstable_basis(sys.a());
  const LqrProblem prob = LqrProblem::projected(sys, phi, costs);
  const double gamma = 0.95;
  const DareSolution opt = solve_dare(prob, gamma);
  Rng rng(77);
  int tested = 0;
  while (tested < 50) {
    Matrix theta = opt.k;
    for (Index j = 0; j < theta.cols(); ++j) theta(0, j) += 0.5 * rng.normal() * std::abs(opt.k(0, j));
    if (!(std::sqrt(gamma) * spectral_radius(prob.a + prob.b * theta) < 1.0)) continue;
    ++tested;
    CHECK(opt.cost <= exact_cost(sys, theta, phi, gamma, costs) * (1.0 + 1e-12));
  }
}

TEST_CASE("damping equivalence") {
  const LtiSystem sys = augment_system(build_cartpole(), 10, 3);
  const CostMatrices costs = CostMatrices::scaled_identity(10, 1, 1.0, 0.1);
  const Matrix phi = true_left_unstable_basis(sys.a());
  const DareSolution opt = solve_dare(LqrProblem::projected(sys, phi, costs), 1.0);
  const Matrix k = lift_controller(opt.k, phi);
  for (double gamma : {0.3, 0.7, 1.0}) {
    const double sg = std::sqrt(gamma);
    const LtiSystem damped(sg * sys.a(), sg * sys.b());
    const double j1 = exact_cost(sys, k, gamma, costs);
    const double j2 = exact_cost(damped, k, 1.0, costs);
    CHECK(std::abs(j1 - j2) <= 1e-10 * j1);
  }
}

TEST_CASE("Lyapunov and covariance cost routes agree") {
  const LtiSystem sys = build_random_system(6, 2, 8);
  const CostMatrices costs = CostMatrices::scaled_identity(6, 2, 1.0, 0.5);
  const LqrProblem prob = LqrProblem::full(sys, costs);
  const DareSolution opt = solve_dare(prob, 0.9);
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix k = opt.k;
    for (Index i = 0; i < k.rows(); ++i)
      for (Index j = 0; j < k.cols(); ++j) k(i, j) += 0.05 * rng.normal();
    if (!(std::sqrt(0.9) * spectral_radius(prob.a + prob.b * k) < 1.0)) continue;
    const double a = lqr_cost(prob, k, 0.9);
    const double b = lqr_cost_via_covariance(prob, k, 0.9);
    CHECK(std::abs(a - b) <= 1e-10 * a);
  }
}

TEST_CASE("CostMatrices validation") {
  CostMatrices bad{Matrix::Identity(2, 2), -Matrix::Identity(1, 1)};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CostMatrices::scaled_identity(3, 1, 2.0, 0.1).validate();
}
