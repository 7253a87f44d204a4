#include <cmath>

#include "doctest.h"
#include "lts/errors.hpp"
#include "lts/lti_system.hpp"

using namespace lts;

TEST_CASE("cartpole matrices") {
  const LtiSystem cp = build_cartpole();
  CHECK(cp.state_dim() == 4);
  CHECK(cp.input_dim() == 1);
  CHECK(cp.a()(3, 2) == 5.0);
  CHECK(cp.b()(1, 0) == 0.25);
  CHECK(spectral_radius(cp.a()) == doctest::Approx(1.0 + std::sqrt(1.25)).epsilon(1e-12));
  CHECK(count_unstable(cp, 1e-9).unstable_count == 3);
}

TEST_CASE("pendulum spectrum") {
  const LtiSystem p = build_pendulum();
  CHECK(p.state_dim() == 2);
  CHECK(p.input_dim() == 1);
  const SpectrumReport rep = count_unstable(p);
  CHECK(rep.eigenvalue_moduli.front() == doctest::Approx(1.0 + std::sqrt(0.625)).epsilon(1e-12));
  CHECK(rep.eigenvalue_moduli.back() == doctest::Approx(1.0 - std::sqrt(0.625)).epsilon(1e-12));
  CHECK(rep.unstable_count == 1);
}

TEST_CASE("step") {
  const LtiSystem cp = build_cartpole();
  CHECK(cp.step(Vector::Zero(4), Vector::Zero(1)).norm() == 0.0);
  Vector e1 = Vector::Zero(4);
  e1(0) = 1.0;
  CHECK((cp.step(e1, Vector::Zero(1)) - (Vector(4) << 1, 0, 0, 0).finished()).norm() == 0.0);
  const Vector u = Vector::Ones(1);
  CHECK((cp.step(Vector::Zero(4), u) - (Vector(4) << 0, 0.25, 0, -0.25).finished()).norm() ==
        doctest::Approx(0.0));
  CHECK_THROWS_AS(cp.step(Vector::Zero(3), u), DimensionError);
}

TEST_CASE("step is linear") {
  const LtiSystem sys = augment_system(build_cartpole(), 12, 3);
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Vector x(12), y(12), u(1), v(1);
    for (Index i = 0; i < 12; ++i) x(i) = rng.normal(), y(i) = rng.normal();
    u(0) = rng.normal();
    v(0) = rng.normal();
    const double a = rng.normal(), b = rng.normal();
    const Vector lhs = sys.step(a * x + b * y, a * u + b * v);
    const Vector rhs = a * sys.step(x, u) + b * sys.step(y, v);
    CHECK((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
  }
}

TEST_CASE("augment_system") {
  const LtiSystem cp30 = augment_system(build_cartpole(), 30, 7);
  CHECK(cp30.state_dim() == 30);
  const SpectrumReport rep = count_unstable(cp30);
  CHECK(rep.unstable_count == 3);
  CHECK(rep.eigenvalue_moduli[0] == doctest::Approx(1.0 + std::sqrt(1.25)).epsilon(1e-10));

  // Nominal block copied verbatim, no coupling.
  CHECK((cp30.a().topLeftCorner(4, 4) - build_cartpole().a()).norm() == 0.0);
  CHECK(cp30.a().topRightCorner(4, 26).norm() == 0.0);
  CHECK(cp30.a().bottomLeftCorner(26, 4).norm() == 0.0);
  const SpectrumReport nominal = count_unstable(build_cartpole().a());
  const SpectrumReport block = count_unstable(Matrix(cp30.a().topLeftCorner(4, 4)));
  for (std::size_t i = 0; i < nominal.eigenvalue_moduli.size(); ++i) {
    CHECK(std::abs(nominal.eigenvalue_moduli[i] - block.eigenvalue_moduli[i]) <= 1e-10);
  }

  const LtiSystem p20 = augment_system(build_pendulum(), 20, 7);
  CHECK(p20.state_dim() == 20);
  CHECK(count_unstable(p20).unstable_count == 1);

  CHECK_THROWS_AS(augment_system(build_cartpole(), 4, 1), DimensionError);
  CHECK_THROWS_AS(augment_system(build_cartpole(), 3, 1), DimensionError);
}

TEST_CASE("build_random_system") {
  const LtiSystem r = build_random_system(5, 3, 42);
  CHECK(r.state_dim() == 5);
  CHECK(r.input_dim() == 3);
  CHECK((r.a() - r.a().transpose()).norm() == 0.0);
  Eigen::JacobiSVD<Matrix> svd(r.a());
  CHECK(std::abs(svd.singularValues()(0) - 2.0) <= 1e-12);
}

TEST_CASE("spectral_radius") {
  CHECK(spectral_radius(Matrix::Identity(3, 3)) == doctest::Approx(1.0));
  Matrix nil(2, 2);
  nil << 0, 1, 0, 0;
  CHECK(spectral_radius(nil) == 0.0);
}

TEST_CASE("spectral_radius agrees with the growth of matrix powers") {
  const Matrix a = augment_system(build_cartpole(), 10, 5).a();
  Matrix power = Matrix::Identity(10, 10);
  for (int k = 0; k < 200; ++k) power = power * a;
  Eigen::JacobiSVD<Matrix> svd(power);
  const double growth = std::pow(svd.singularValues()(0), 1.0 / 200.0);
  CHECK(std::abs(growth / spectral_radius(a) - 1.0) <= 0.05);
}

TEST_CASE("count_unstable") {
  CHECK(count_unstable(Matrix(Vector((Vector(2) << 0.5, 0.9).finished()).asDiagonal()))
            .unstable_count == 0);
  const SpectrumReport rep =
      count_unstable(Matrix(Vector((Vector(3) << 0.3, 1.5, 1.2).finished()).asDiagonal()));
  CHECK(rep.unstable_count == 2);
  REQUIRE(rep.eigenvalue_moduli.size() == 3);
  CHECK(rep.eigenvalue_moduli[0] == doctest::Approx(1.5));
  CHECK(rep.eigenvalue_moduli[1] == doctest::Approx(1.2));
  CHECK(rep.eigenvalue_moduli[2] == doctest::Approx(0.3));
  CHECK_THROWS_AS(count_unstable(Matrix::Identity(2, 2), -1.0), ValidationError);
}

TEST_CASE("count_unstable is monotone in the margin") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix a = 0.6 * build_random_system(8, 1, seed).a();
    Index prev = 0;
    for (double margin : {0.0, 0.05, 0.1, 0.3, 0.6, 0.9}) {
      const Index ell = count_unstable(a, margin).unstable_count;
      CHECK(ell >= prev);
      prev = ell;
    }
  }
}

TEST_CASE("sample_initial_state") {
  Rng rng(1);
  const Vector x = sample_initial_state({4, 2.0}, rng);
  CHECK(x.norm() == doctest::Approx(2.0).epsilon(1e-12));

  Rng a(99), b(99);
  const auto spec = InitialStateSpec::isotropic(5);
  CHECK(spec.radius == doctest::Approx(std::sqrt(5.0)));
  CHECK((sample_initial_state(spec, a) - sample_initial_state(spec, b)).norm() == 0.0);
}

TEST_CASE("sample_initial_state covariance") {
  Rng rng(2024);
  const auto spec = InitialStateSpec::isotropic(3);
  Matrix cov = Matrix::Zero(3, 3);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const Vector x = sample_initial_state(spec, rng);
    cov += x * x.transpose();
  }
  cov /= draws;
  CHECK((cov - Matrix::Identity(3, 3)).norm() <= 0.05);
}

TEST_CASE("three-state plants") {
  const LtiSystem d = build_three_state(ThreeStateKind::kDiagonalPair, 1.5, 0.97);
  const SpectrumReport rd = count_unstable(d);
  CHECK(rd.unstable_count == 2);
  CHECK(rd.eigenvalue_moduli[0] == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(rd.eigenvalue_moduli[1] == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(rd.eigenvalue_moduli[2] == doctest::Approx(0.97).epsilon(1e-10));

  const LtiSystem j = build_three_state(ThreeStateKind::kJordanPair, 1.5, 0.97);
  CHECK(count_unstable(j).unstable_count == 2);
  // gm = 1: A - 1.5 I has rank 2.
  Eigen::FullPivLU<Matrix> lu(j.a() - 1.5 * Matrix::Identity(3, 3));
  lu.setThreshold(1e-8);
  CHECK(lu.rank() == 2);
}

TEST_CASE("LtiSystem validation") {
  CHECK_THROWS_AS(LtiSystem(Matrix::Zero(2, 3), Matrix::Zero(2, 1)), DimensionError);
  CHECK_THROWS_AS(LtiSystem(Matrix::Zero(2, 2), Matrix::Zero(3, 1)), DimensionError);
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(LtiSystem(bad, Matrix::Zero(2, 1)), ValidationError);
}
