#include <cmath>

#include "doctest.h"
#include "lts/anneal.hpp"
#include "lts/errors.hpp"

using namespace lts;

namespace {

SubspaceEstimate exact_basis(const LtiSystem& sys) {
  SubspaceEstimate est;
  est.phi_hat = true_left_unstable_basis(sys.a());
  return est;
}

AnnealConfig pendulum_config(const LtiSystem& sys) {
  AnnealConfig cfg;
  cfg.rho_bar = spectral_radius(sys.a());
  cfg.costs = CostMatrices::scaled_identity(sys.state_dim(), sys.input_dim(), 1.0, 0.01);
  return cfg;
}

PolicyOracle exact_policy(const LtiSystem& sys, const Matrix& phi, const CostMatrices& costs) {
  PolicyOracle p;
  p.gradient = [&sys, phi, costs](const Matrix& theta, double gamma, Rng&) {
    try {
      return exact_gradient(sys, theta, phi, gamma, costs);
    } catch (const InstabilityError& e) {
      throw DivergenceError(e.what(), 0);
    }
  };
  p.cost = [&sys, phi, costs](const Matrix& theta, double gamma, Rng&) {
    try {
      return exact_cost(sys, theta, phi, gamma, costs);
    } catch (const InstabilityError& e) {
      throw DivergenceError(e.what(), 0);
    }
  };
  return p;
}

}  // namespace

TEST_CASE("alpha_update examples") {
  const Matrix q = Matrix::Identity(2, 2);
  const Matrix r = Matrix::Identity(1, 1);
  const Matrix theta0 = Matrix::Zero(1, 2);
  CHECK(alpha_update(9.0, q, theta0, r, 10.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(alpha_update(1e9, q, theta0, r, 10.0) < 1e-8);
  CHECK(alpha_update(1e9, q, theta0, r, 10.0) > 0.0);
  CHECK(alpha_update(2.0, q, theta0, r, 10.0) == 10.0);
  CHECK(alpha_update(9.0, q, theta0, r, 0.2) == 0.2);
  CHECK_THROWS_AS(alpha_update(9.0, Matrix::Zero(2, 2), theta0, r, 10.0), ValidationError);
  CHECK_THROWS_AS(alpha_update(0.0, q, theta0, r, 10.0), ValidationError);
  // s includes theta^T R theta.
  const Matrix theta = (Matrix(1, 2) << 1.0, 0.0).finished();
  CHECK(alpha_update(9.0, q, theta, r, 10.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("lift_controller") {
  Rng rng(1);
  const Matrix phi = true_left_unstable_basis(augment_system(build_cartpole(), 8, 1).a());
  CHECK(lift_controller(Matrix::Zero(1, 3), phi).norm() == 0.0);
  const Matrix theta = (Matrix(2, 3) << 1, 2, 3, 4, 5, 6).finished();
  CHECK((lift_controller(theta, Matrix::Identity(3, 3)) - theta).norm() == 0.0);
  CHECK_THROWS_AS(lift_controller(Matrix::Zero(1, 2), phi), DimensionError);
}

TEST_CASE("AnnealConfig validation") {
  AnnealConfig cfg;
  cfg.costs = CostMatrices::scaled_identity(2, 1);
  CHECK_THROWS_AS(cfg.validate(), ValidationError);  // rho_bar missing
  cfg.rho_bar = 2.0;
  cfg.validate();
  cfg.gamma0 = 0.3;  // >= 1 / rho_bar^2
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.gamma0 = 0.1;
  cfg.xi = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("initial zero controller is damped-stable") {
  for (const LtiSystem& sys : {augment_system(build_cartpole(), 30, 1),
                               augment_system(build_pendulum(), 20, 1)}) {
    const AnnealConfig cfg = pendulum_config(sys);
    cfg.validate();
    CHECK(std::sqrt(cfg.gamma0) * spectral_radius(sys.a()) < 1.0);
  }
}

TEST_CASE("run_anneal on the pendulum") {
  const LtiSystem sys = augment_system(build_pendulum(), 20, 5);
  SystemOracle oracle(sys);
  const SubspaceEstimate basis = exact_basis(sys);
  const AnnealConfig cfg = pendulum_config(sys);
  Rng rng(3);
  const AnnealResult res = run_anneal(oracle, basis, cfg, rng, evaluation_hooks(oracle));
  REQUIRE(res.trace.status == AnnealStatus::kReachedGammaOne);
  CHECK(res.gamma == 1.0);
  CHECK(spectral_radius(sys.a() + sys.b() * res.k) < 1.0);
  CHECK((res.k - res.theta * basis.phi_hat.transpose()).norm() == 0.0);
  CHECK(res.trace.records.back().spectral_radius.value() < 1.0);
  for (std::size_t i = 1; i < res.trace.records.size(); ++i) {
    CHECK(res.trace.records[i].gamma > res.trace.records[i - 1].gamma);
    CHECK(res.trace.records[i].j == static_cast<Index>(i));
  }
  CHECK(res.trace.iterations_to_one() == static_cast<Index>(res.trace.records.size()) - 1);

  const auto phases = static_cast<std::uint64_t>(res.trace.records.size());
  const auto per_phase = static_cast<std::uint64_t>(cfg.est.cost_rollouts +
                                                    2 * cfg.est.rollouts * cfg.inner_steps);
  CHECK(res.budget.rollouts == phases * per_phase);
  CHECK(res.budget.steps == phases * per_phase * static_cast<std::uint64_t>(cfg.est.horizon));
  CHECK(res.trace.records.back().rollouts_cum == res.budget.rollouts);
}

TEST_CASE("run_anneal keeps the damped projected loop stable with the exact basis") {
  const LtiSystem sys = augment_system(build_pendulum(), 20, 6);
  SystemOracle oracle(sys);
  const SubspaceEstimate basis = exact_basis(sys);
  const AnnealConfig cfg = pendulum_config(sys);
  const LqrProblem prob = LqrProblem::projected(sys, basis.phi_hat, cfg.costs);
  AnnealHooks hooks;
  int checked = 0;
  hooks.on_record = [&](const AnnealRecord& r, const Matrix& theta) {
    CHECK(std::sqrt(r.gamma) * spectral_radius(prob.a + prob.b * theta) < 1.0);
    ++checked;
  };
  Rng rng(11);
  const AnnealResult res = run_anneal(oracle, basis, cfg, rng, hooks);
  CHECK(res.trace.status == AnnealStatus::kReachedGammaOne);
  CHECK(checked == static_cast<int>(res.trace.records.size()));
}

TEST_CASE("run_anneal on an already stable plant") {
  const LtiSystem sys(0.4 * build_random_system(5, 1, 3).a(), Matrix::Ones(5, 1));
  SystemOracle oracle(sys);
  SubspaceEstimate basis;
  basis.phi_hat = Matrix(Vector::Unit(5, 0));
  AnnealConfig cfg;
  cfg.rho_bar = 0.8;
  cfg.costs = CostMatrices::scaled_identity(5, 1, 1.0, 0.01);
  Rng rng(2);
  const AnnealResult res = run_anneal(oracle, basis, cfg, rng, evaluation_hooks(oracle));
  REQUIRE(res.trace.status == AnnealStatus::kReachedGammaOne);
  CHECK(spectral_radius(sys.a() + sys.b() * res.k) < 1.0);
  for (std::size_t i = 1; i < res.trace.records.size(); ++i) {
    CHECK(res.trace.records[i].gamma > res.trace.records[i - 1].gamma);
    CHECK(res.trace.records[i - 1].alpha >= 0.1);
  }
}

TEST_CASE("baseline equals the subspace method when the basis is the identity") {
  const LtiSystem sys = build_pendulum();
  AnnealConfig cfg = pendulum_config(sys);
  SystemOracle o1(sys), o2(sys);
  Rng r1(9), r2(9);
  const AnnealResult a = run_anneal(o1, SubspaceEstimate::identity(2), cfg, r1);
  const AnnealResult b = run_baseline_fullstate(o2, cfg, r2);
  CHECK(a.trace.to_csv() == b.trace.to_csv());
  CHECK((a.k - b.k).norm() == 0.0);
}

TEST_CASE("max_iters and divergence statuses") {
  const LtiSystem sys = augment_system(build_pendulum(), 10, 2);
  const SubspaceEstimate basis = exact_basis(sys);
  AnnealConfig cfg = pendulum_config(sys);
  cfg.max_outer_iters = 3;
  {
    SystemOracle oracle(sys);
    Rng rng(1);
    const AnnealResult res = run_anneal(oracle, basis, cfg, rng);
    CHECK(res.trace.status == AnnealStatus::kMaxIters);
    CHECK(res.trace.records.size() == 3);
    CHECK(!res.trace.iterations_to_one());
  }
  cfg.max_outer_iters = 100;
  cfg.step_size = 1e3;
  {
    SystemOracle oracle(sys);
    Rng rng(1);
    const AnnealResult res = run_anneal(oracle, basis, cfg, rng);
    CHECK(res.trace.status == AnnealStatus::kDiverged);
    CHECK(!res.trace.failure.empty());
  }
}

TEST_CASE("exact-gradient inner loop decreases the cost monotonically") {
  const LtiSystem sys = augment_system(build_pendulum(), 20, 8);
  const Matrix phi = true_left_unstable_basis(sys.a());
  const CostMatrices costs = CostMatrices::scaled_identity(20, 1, 1.0, 0.01);
  const double gamma = 0.25;
  Matrix theta = Matrix::Zero(1, 1);
  double prev = exact_cost(sys, theta, phi, gamma, costs);
  for (int n = 0; n < 200; ++n) {
    theta -= 1e-3 * exact_gradient(sys, theta, phi, gamma, costs);
    const double j = exact_cost(sys, theta, phi, gamma, costs);
    CHECK(j <= prev);
    prev = j;
  }
}

TEST_CASE("alpha rule can step past the feasibility boundary") {
  // Scalar a = 2, theta = 0: J(gamma) = 1 / (1 - 4 gamma), feasible for gamma < 1/4.
  // Staying feasible needs alpha < 1 / (J - 1); the rule returns 9 / (4J - 9).
  const double gamma = 0.2;
  const double j = 1.0 / (1.0 - 4.0 * gamma);
  const double alpha = alpha_update(j, Matrix::Identity(1, 1), Matrix::Zero(1, 1),
                                    Matrix::Identity(1, 1), 100.0);
  CHECK(alpha == doctest::Approx(9.0 / (4.0 * j - 9.0)));
  CHECK(alpha > 1.0 / (j - 1.0));
  CHECK((1.0 + 0.9 * alpha) * gamma > 0.25);
}

TEST_CASE("annealing with exact gradients") {
  // Infinite-horizon gradients give no slack past the boundary, so the
  // discount moves more slowly here than in the model-free default.
  const LtiSystem sys = augment_system(build_cartpole(), 12, 4);
  const Matrix phi = true_left_unstable_basis(sys.a());
  SubspaceEstimate basis;
  basis.phi_hat = phi;
  AnnealConfig cfg = pendulum_config(sys);
  cfg.step_size = 1e-3;
  cfg.alpha_max = 0.05;
  Rng rng(0);
  const AnnealResult res = run_anneal(exact_policy(sys, phi, cfg.costs), basis, cfg, rng);
  CAPTURE(res.trace.failure);
  CHECK(res.trace.status == AnnealStatus::kReachedGammaOne);
  CHECK(spectral_radius(sys.a() + sys.b() * res.k) < 1.0);
  CHECK(res.budget.rollouts == 0);
}

TEST_CASE("trace CSV") {
  AnnealTrace t;
  AnnealRecord r;
  r.j = 0;
  r.gamma = 0.5;
  r.alpha = 0.2;
  r.cost_estimate = 3.0;
  r.rollouts_cum = 10;
  r.steps_cum = 500;
  t.records.push_back(r);
  r.j = 1;
  r.spectral_radius = 0.9;
  t.records.push_back(r);
  CHECK(t.to_csv() ==
        "j,gamma,alpha,cost_estimate,spectral_radius,rollouts_cum,steps_cum\n"
        "0,0.5,0.20000000000000001,3,,10,500\n"
        "1,0.5,0.20000000000000001,3,0.90000000000000002,10,500\n");
  CHECK(to_string(AnnealStatus::kDiverged) == "diverged");
}
