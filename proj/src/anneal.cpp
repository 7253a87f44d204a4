#include "lts/anneal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lts/errors.hpp"

namespace lts {

void AnnealConfig::validate() const {
  if (!(gamma0 > 0.0 && gamma0 < 1.0)) throw ValidationError("gamma0 must lie in (0,1)");
  if (!(xi > 0.0 && xi < 1.0)) throw ValidationError("xi must lie in (0,1)");
  if (inner_steps < 1) throw ValidationError("inner_steps must be >= 1");
  if (!(step_size > 0.0)) throw ValidationError("step_size must be > 0");
  if (max_outer_iters < 1) throw ValidationError("max_outer_iters must be >= 1");
  if (!(alpha_max > 0.0)) throw ValidationError("alpha_max must be > 0");
  if (!(rho_bar > 0.0)) {
    throw ValidationError("rho_bar (upper bound on rho(A)) is required");
  }
  if (!(gamma0 < 1.0 / (rho_bar * rho_bar))) {
    throw ValidationError("gamma0 must satisfy gamma0 < 1 / rho_bar^2");
  }
  est.validate();
  costs.validate();
}

std::string to_string(AnnealStatus status) {
  switch (status) {
    case AnnealStatus::kReachedGammaOne: return "reached_gamma_one";
    case AnnealStatus::kMaxIters: return "max_iters";
    case AnnealStatus::kDiverged: return "diverged";
  }
  return "unknown";
}

std::optional<Index> AnnealTrace::iterations_to_one() const {
  if (status != AnnealStatus::kReachedGammaOne || records.empty()) return std::nullopt;
  return records.back().j;
}

std::string AnnealTrace::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "j,gamma,alpha,cost_estimate,spectral_radius,rollouts_cum,steps_cum\n";
  for (const auto& r : records) {
    out << r.j << ',' << r.gamma << ',' << r.alpha << ',' << r.cost_estimate << ',';
    if (r.spectral_radius) out << *r.spectral_radius;
    out << ',' << r.rollouts_cum << ',' << r.steps_cum << '\n';
  }
  return out.str();
}

double alpha_update(double cost_estimate, const Matrix& q_proj,
                    const Matrix& theta, const Matrix& r_cost,
                    double alpha_max) {
  if (!(cost_estimate > 0.0)) {
    throw ValidationError("alpha_update: cost estimate must be positive");
  }
  const double s = min_symmetric_eigenvalue(q_proj + theta.transpose() * r_cost * theta);
  if (!(s > 0.0)) {
    throw ValidationError("alpha_update: projected stage cost is not positive definite");
  }
  const double denom = (4.0 / 3.0) * cost_estimate - 3.0 * s;
  if (denom <= 0.0) return alpha_max;
  return std::min(3.0 * s / denom, alpha_max);
}

PolicyOracle model_free_policy_oracle(SystemOracle& oracle,
                                      const SubspaceEstimate& basis,
                                      const AnnealConfig& cfg) {
  PolicyOracle policy;
  policy.gradient = [&oracle, &basis, est = cfg.est, costs = cfg.costs](
                        const Matrix& theta, double gamma, Rng& rng) {
    return estimate_gradient(oracle, LowDimController(theta, basis), gamma, est, costs, rng);
  };
  policy.cost = [&oracle, &basis, est = cfg.est, costs = cfg.costs](
                    const Matrix& theta, double gamma, Rng& rng) {
    return estimate_cost(oracle, LowDimController(theta, basis), gamma, est, costs, rng);
  };
  policy.usage = [&oracle] { return oracle.usage(); };
  return policy;
}

AnnealResult run_anneal(const PolicyOracle& policy, const SubspaceEstimate& basis,
                        const AnnealConfig& cfg, Rng& rng,
                        const AnnealHooks& hooks) {
  cfg.validate();
  const Index ell = basis.ell();
  const Index n_u = cfg.costs.r.rows();
  if (cfg.costs.q.rows() != basis.state_dim()) {
    throw DimensionError("run_anneal: Q does not match the basis dimension");
  }
  const Matrix q_proj = basis.phi_hat.transpose() * cfg.costs.q * basis.phi_hat;
  const BudgetUsage start = policy.usage ? policy.usage() : BudgetUsage{};

  AnnealResult result;
  Matrix theta = Matrix::Zero(n_u, ell);
  double gamma = cfg.gamma0;
  result.trace.status = AnnealStatus::kMaxIters;

  for (Index j = 0; j < cfg.max_outer_iters; ++j) {
    double cost = 0.0;
    try {
      for (Index n = 0; n < cfg.inner_steps; ++n) {
        theta -= cfg.step_size * policy.gradient(theta, gamma, rng);
        if (!theta.allFinite()) {
          throw DivergenceError("policy gradient produced a non-finite gain", n);
        }
      }
      cost = policy.cost(theta, gamma, rng);
    } catch (const DivergenceError& e) {
      result.trace.status = AnnealStatus::kDiverged;
      std::ostringstream msg;
      msg << "outer iteration " << j << " at gamma " << gamma << ": " << e.what();
      result.trace.failure = msg.str();
      break;
    }

    AnnealRecord rec;
    rec.j = j;
    rec.gamma = gamma;
    rec.cost_estimate = cost;
    rec.alpha = alpha_update(cost, q_proj, theta, cfg.costs.r, cfg.alpha_max);
    rec.pg_steps = cfg.inner_steps;
    if (hooks.closed_loop_radius) {
      rec.spectral_radius = hooks.closed_loop_radius(lift_controller(theta, basis.phi_hat));
    }
    if (policy.usage) {
      const BudgetUsage now = policy.usage();
      rec.rollouts_cum = now.rollouts - start.rollouts;
      rec.steps_cum = now.steps - start.steps;
    }
    result.trace.records.push_back(rec);
    if (hooks.on_record) hooks.on_record(rec, theta);

    if (gamma >= 1.0) {
      result.trace.status = AnnealStatus::kReachedGammaOne;
      break;
    }
    gamma = std::min(1.0, (1.0 + cfg.xi * rec.alpha) * gamma);
  }

  result.theta = theta;
  result.k = lift_controller(theta, basis.phi_hat);
  result.gamma = gamma;
  if (policy.usage) {
    const BudgetUsage now = policy.usage();
    result.budget = {now.probes - start.probes, now.rollouts - start.rollouts,
                     now.steps - start.steps};
  }
  return result;
}

AnnealResult run_anneal(SystemOracle& oracle, const SubspaceEstimate& basis,
                        const AnnealConfig& cfg, Rng& rng,
                        const AnnealHooks& hooks) {
  if (basis.state_dim() != oracle.state_dim()) {
    throw DimensionError("run_anneal: basis dimension differs from the oracle's");
  }
  return run_anneal(model_free_policy_oracle(oracle, basis, cfg), basis, cfg, rng, hooks);
}

AnnealResult run_baseline_fullstate(SystemOracle& oracle, const AnnealConfig& cfg,
                                    Rng& rng, const AnnealHooks& hooks) {
  const SubspaceEstimate identity = SubspaceEstimate::identity(oracle.state_dim());
  return run_anneal(oracle, identity, cfg, rng, hooks);
}

AnnealHooks evaluation_hooks(const SystemOracle& oracle) {
  AnnealHooks hooks;
  const LtiSystem& sys = evaluation::hidden_system(oracle);
  hooks.closed_loop_radius = [&sys](const Matrix& k) {
    return spectral_radius(sys.a() + sys.b() * k);
  };
  return hooks;
}

}  // namespace lts
