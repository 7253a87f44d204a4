#pragma once

#include <optional>

#include "lts/lqr.hpp"
#include "lts/oracle.hpp"
#include "lts/subspace.hpp"

namespace lts {

/// Low-dimensional gain theta (n_u x ell) tied to a basis phi_hat.
class LowDimController {
 public:
  LowDimController(Matrix theta, const SubspaceEstimate& basis);

  const Matrix& theta() const noexcept { return theta_; }
  const SubspaceEstimate& basis() const noexcept { return *basis_; }

  /// K = theta phi_hat^T.
  Matrix lift() const;

 private:
  Matrix theta_;
  const SubspaceEstimate* basis_;
};

/// K = theta phi_hat^T.
Matrix lift_controller(const Matrix& theta, const Matrix& phi_hat);

struct EstimationParams {
  double smoothing_radius = 1e-3;  // r
  Index rollouts = 20;             // n_s, antithetic pairs per gradient
  Index cost_rollouts = 100;       // n_c
  Index horizon = 50;              // tau
  /// Bound on the damped state norm gamma^{t/2} ||x_t||; <= 0 selects
  /// 1e8 sqrt(n_x).
  double divergence_guard = 0.0;
  /// Test hook: every rollout starts here instead of a fresh sphere sample.
  std::optional<Vector> fixed_initial_state;
  /// Test hook: use -U_i in place of every sampled U_i.
  bool flip_perturbations = false;

  void validate() const;
  double guard_for(Index state_dim) const;
};

/// sum_{t < tau} gamma^t z_t^T (phi^T Q phi + theta^T R theta) z_t along the
/// true closed loop u_t = theta phi^T x_t, with z_t = phi^T x_t. One rollout
/// and tau steps from the oracle budget.
double rollout_value(SystemOracle& oracle, const LowDimController& ctrl,
                     double gamma, Index tau, const Vector& x0,
                     const CostMatrices& costs,
                     double divergence_guard = 0.0);

/// n_u x ell matrix, uniform direction, Frobenius norm sqrt(n_u ell).
Matrix sample_sphere_perturbation(Index rows, Index cols, Rng& rng);

/// Two-point estimate (1 / (2 r n_s)) sum_i (V(theta + r U_i) - V(theta - r U_i)) U_i.
/// Each antithetic pair shares one initial state; pair i draws from
/// rng.split(i). Consumes 2 n_s rollouts.
Matrix estimate_gradient(SystemOracle& oracle, const LowDimController& ctrl,
                         double gamma, const EstimationParams& params,
                         const CostMatrices& costs, Rng& rng);

/// Mean of n_c rollout values from fresh initial states.
double estimate_cost(SystemOracle& oracle, const LowDimController& ctrl,
                     double gamma, const EstimationParams& params,
                     const CostMatrices& costs, Rng& rng);

}  // namespace lts
