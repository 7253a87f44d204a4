#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lts/policy_gradient.hpp"

namespace lts {

struct AnnealConfig {
  double gamma0 = 0.1;
  double xi = 0.9;
  Index inner_steps = 10;       // N
  double step_size = 1e-3;      // eta
  Index max_outer_iters = 5000;
  double alpha_max = 0.2;
  /// Upper bound on rho(A); gamma0 must satisfy gamma0 < 1 / rho_bar^2.
  double rho_bar = 0.0;
  EstimationParams est;
  CostMatrices costs;

  /// Throws ValidationError on out-of-range fields.
  void validate() const;
};

enum class AnnealStatus { kReachedGammaOne, kMaxIters, kDiverged };

std::string to_string(AnnealStatus status);

struct AnnealRecord {
  Index j = 0;
  double gamma = 0.0;          // discount used in this phase
  double alpha = 0.0;          // rate computed at the end of the phase
  double cost_estimate = 0.0;  // J-hat at (theta_{j+1}, gamma_j)
  std::optional<double> spectral_radius;  // evaluation hook only
  Index pg_steps = 0;
  std::uint64_t rollouts_cum = 0;
  std::uint64_t steps_cum = 0;
};

struct AnnealTrace {
  std::vector<AnnealRecord> records;
  AnnealStatus status = AnnealStatus::kMaxIters;
  std::string failure;  // divergence message when status == kDiverged

  /// Number of discount updates performed before the phase that ran at
  /// gamma = 1, or nullopt if gamma = 1 was never reached.
  std::optional<Index> iterations_to_one() const;

  /// Columns j,gamma,alpha,cost_estimate,spectral_radius,rollouts_cum,steps_cum.
  std::string to_csv() const;
};

struct AnnealResult {
  Matrix k;      // theta phi_hat^T
  Matrix theta;
  double gamma = 0.0;
  AnnealTrace trace;
  BudgetUsage budget;  // oracle usage during the run
};

/// alpha = 3 s / ((4/3) J - 3 s) with s = sigma_min(q_proj + theta^T R theta),
/// clamped to (0, alpha_max]; alpha_max when the denominator is <= 0.
double alpha_update(double cost_estimate, const Matrix& q_proj,
                    const Matrix& theta, const Matrix& r_cost,
                    double alpha_max);

/// Source of gradient and cost information for the annealing loop. The
/// model-free source wraps the oracle estimators; tests substitute exact
/// model-based values.
struct PolicyOracle {
  std::function<Matrix(const Matrix& theta, double gamma, Rng& rng)> gradient;
  std::function<double(const Matrix& theta, double gamma, Rng& rng)> cost;
  std::function<BudgetUsage()> usage;
};

PolicyOracle model_free_policy_oracle(SystemOracle& oracle,
                                      const SubspaceEstimate& basis,
                                      const AnnealConfig& cfg);

struct AnnealHooks {
  /// rho(A + B K) from the hidden system; evaluation only.
  std::function<double(const Matrix& k)> closed_loop_radius;
  std::function<void(const AnnealRecord&, const Matrix& theta)> on_record;
};

/// Discount-annealed policy gradient on the given basis.
AnnealResult run_anneal(SystemOracle& oracle, const SubspaceEstimate& basis,
                        const AnnealConfig& cfg, Rng& rng,
                        const AnnealHooks& hooks = {});

/// Same loop driven by an arbitrary PolicyOracle.
AnnealResult run_anneal(const PolicyOracle& policy, const SubspaceEstimate& basis,
                        const AnnealConfig& cfg, Rng& rng,
                        const AnnealHooks& hooks = {});

/// Full-state baseline: the same loop with phi_hat = I.
AnnealResult run_baseline_fullstate(SystemOracle& oracle,
                                    const AnnealConfig& cfg, Rng& rng,
                                    const AnnealHooks& hooks = {});

/// Hook computing rho(A + B K) from the oracle's hidden system.
AnnealHooks evaluation_hooks(const SystemOracle& oracle);

}  // namespace lts
