#include "lts/policy_gradient.hpp"

#include <cmath>
#include <string>

#include "lts/errors.hpp"

namespace lts {
namespace {

constexpr double kHardAbortNorm = 1e150;

struct StageCost {
  Matrix q_proj;  // phi^T Q phi
  const Matrix* r;
};

StageCost make_stage_cost(const SubspaceEstimate& basis, const CostMatrices& costs) {
  if (costs.q.rows() != basis.state_dim()) {
    throw DimensionError("policy gradient: Q must be n_x x n_x");
  }
  return {basis.phi_hat.transpose() * costs.q * basis.phi_hat, &costs.r};
}

double value_with(SystemOracle& oracle, const Matrix& theta,
                  const SubspaceEstimate& basis, const StageCost& stage,
                  double gamma, Index tau, const Vector& x0, double guard) {
  const Matrix& phi = basis.phi_hat;
  const Matrix weight = stage.q_proj + theta.transpose() * (*stage.r) * theta;
  const Matrix gain = theta * phi.transpose();
  const Matrix states = oracle.rollout(x0, gain, tau, kHardAbortNorm);
  if (states.cols() < tau) {
    throw DivergenceError("rollout overflowed at t = " + std::to_string(states.cols() - 1),
                          states.cols() - 1);
  }
  const double root_gamma = std::sqrt(gamma);
  double damping = 1.0;
  for (Index t = 0; t < states.cols(); ++t) {
    if (!(damping * states.col(t).stableNorm() <= guard)) {
      throw DivergenceError("rollout diverged at t = " + std::to_string(t), t);
    }
    damping *= root_gamma;
  }
  const Matrix z = phi.transpose() * states;
  double value = 0.0;
  double discount = 1.0;
  for (Index t = 0; t < z.cols(); ++t) {
    value += discount * z.col(t).dot(weight * z.col(t));
    discount *= gamma;
  }
  return value;
}

Vector initial_state(const EstimationParams& params, Index n, Rng& rng) {
  if (params.fixed_initial_state) {
    if (params.fixed_initial_state->size() != n) {
      throw DimensionError("fixed_initial_state has the wrong dimension");
    }
    return *params.fixed_initial_state;
  }
  return sample_initial_state(InitialStateSpec::isotropic(n), rng);
}

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw ValidationError("gamma must lie in (0, 1]");
  }
}

}  // namespace

LowDimController::LowDimController(Matrix theta, const SubspaceEstimate& basis)
    : theta_(std::move(theta)), basis_(&basis) {
  if (theta_.cols() != basis.ell()) {
    throw DimensionError("LowDimController: theta must have ell columns");
  }
}

Matrix LowDimController::lift() const { return lift_controller(theta_, basis_->phi_hat); }

Matrix lift_controller(const Matrix& theta, const Matrix& phi_hat) {
  if (theta.cols() != phi_hat.cols()) {
    throw DimensionError("lift_controller: theta and phi_hat disagree on ell");
  }
  return theta * phi_hat.transpose();
}

void EstimationParams::validate() const {
  if (!(smoothing_radius > 0.0)) throw ValidationError("smoothing radius must be > 0");
  if (rollouts < 1) throw ValidationError("rollouts (n_s) must be >= 1");
  if (cost_rollouts < 1) throw ValidationError("cost rollouts (n_c) must be >= 1");
  if (horizon < 1) throw ValidationError("horizon (tau) must be >= 1");
  if (!std::isfinite(divergence_guard)) {
    throw ValidationError("divergence guard must be finite");
  }
}

double EstimationParams::guard_for(Index state_dim) const {
  return divergence_guard > 0.0
             ? divergence_guard
             : 1e8 * std::sqrt(static_cast<double>(state_dim));
}

double rollout_value(SystemOracle& oracle, const LowDimController& ctrl,
                     double gamma, Index tau, const Vector& x0,
                     const CostMatrices& costs, double divergence_guard) {
  check_gamma(gamma);
  if (tau < 1) throw ValidationError("rollout_value: tau must be >= 1");
  const StageCost stage = make_stage_cost(ctrl.basis(), costs);
  const double guard = divergence_guard > 0.0
                           ? divergence_guard
                           : 1e8 * std::sqrt(static_cast<double>(oracle.state_dim()));
  return value_with(oracle, ctrl.theta(), ctrl.basis(), stage, gamma, tau, x0, guard);
}

Matrix sample_sphere_perturbation(Index rows, Index cols, Rng& rng) {
  if (rows < 1 || cols < 1) throw DimensionError("sample_sphere_perturbation: empty shape");
  Matrix u(rows, cols);
  double norm = 0.0;
  do {
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) u(i, j) = rng.normal();
    norm = u.norm();
  } while (norm == 0.0);
  return u * (std::sqrt(static_cast<double>(rows * cols)) / norm);
}

Matrix estimate_gradient(SystemOracle& oracle, const LowDimController& ctrl,
                         double gamma, const EstimationParams& params,
                         const CostMatrices& costs, Rng& rng) {
  check_gamma(gamma);
  params.validate();
  const SubspaceEstimate& basis = ctrl.basis();
  const StageCost stage = make_stage_cost(basis, costs);
  const Index n = oracle.state_dim();
  const double guard = params.guard_for(n);
  const double r = params.smoothing_radius;
  const Matrix& theta = ctrl.theta();

  const Rng base(rng.next_u64());
  Matrix grad = Matrix::Zero(theta.rows(), theta.cols());
  for (Index i = 0; i < params.rollouts; ++i) {
    Rng stream = base.split(static_cast<std::uint64_t>(i));
    Matrix u = sample_sphere_perturbation(theta.rows(), theta.cols(), stream);
    if (params.flip_perturbations) u = -u;
    const Vector x0 = initial_state(params, n, stream);
    try {
      const double plus = value_with(oracle, theta + r * u, basis, stage, gamma,
                                     params.horizon, x0, guard);
      const double minus = value_with(oracle, theta - r * u, basis, stage, gamma,
                                      params.horizon, x0, guard);
      grad += (plus - minus) * u;
    } catch (const DivergenceError& e) {
      throw DivergenceError("estimate_gradient: perturbation " + std::to_string(i) +
                                " diverged (" + e.what() + ")",
                            e.step(), i);
    }
  }
  return grad / (2.0 * r * static_cast<double>(params.rollouts));
}

double estimate_cost(SystemOracle& oracle, const LowDimController& ctrl,
                     double gamma, const EstimationParams& params,
                     const CostMatrices& costs, Rng& rng) {
  check_gamma(gamma);
  params.validate();
  const StageCost stage = make_stage_cost(ctrl.basis(), costs);
  const Index n = oracle.state_dim();
  const double guard = params.guard_for(n);

  const Rng base(rng.next_u64());
  double total = 0.0;
  for (Index i = 0; i < params.cost_rollouts; ++i) {
    Rng stream = base.split(static_cast<std::uint64_t>(i));
    const Vector x0 = initial_state(params, n, stream);
    try {
      total += value_with(oracle, ctrl.theta(), ctrl.basis(), stage, gamma,
                          params.horizon, x0, guard);
    } catch (const DivergenceError& e) {
      throw DivergenceError("estimate_cost: rollout " + std::to_string(i) +
                                " diverged (" + e.what() + ")",
                            e.step(), i);
    }
  }
  return total / static_cast<double>(params.cost_rollouts);
}

}  // namespace lts
