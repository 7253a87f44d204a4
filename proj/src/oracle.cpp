#include "lts/oracle.hpp"

#include <string>

#include "lts/errors.hpp"

namespace lts {

namespace evaluation {
const LtiSystem& hidden_system(const SystemOracle& oracle) {
  return oracle.system_;
}
}  // namespace evaluation

SystemOracle::SystemOracle(LtiSystem system, BudgetLimits limits)
    : system_(std::move(system)), limits_(limits) {}

void SystemOracle::charge(std::uint64_t probes, std::uint64_t rollouts,
                          std::uint64_t steps) {
  if (probes_.load() + probes > limits_.max_probes ||
      rollouts_.load() + rollouts > limits_.max_rollouts ||
      steps_.load() + steps > limits_.max_steps) {
    throw BudgetError("SystemOracle: interaction budget exhausted");
  }
  probes_ += probes;
  rollouts_ += rollouts;
  steps_ += steps;
}

Vector SystemOracle::probe(Index i) {
  if (i < 0 || i >= state_dim()) {
    throw DimensionError("SystemOracle::probe: index " + std::to_string(i) +
                         " out of range");
  }
  charge(1, 0, 1);
  return system_.a().col(i);
}

Matrix SystemOracle::rollout(const Vector& x0, const Matrix& gain,
                             Index horizon, double abort_norm) {
  const Index n = state_dim();
  if (x0.size() != n) throw DimensionError("SystemOracle::rollout: x0 size");
  if (gain.rows() != input_dim() || gain.cols() != n) {
    throw DimensionError("SystemOracle::rollout: gain must be n_u x n_x");
  }
  if (horizon < 1) throw ValidationError("SystemOracle::rollout: horizon < 1");
  charge(0, 1, static_cast<std::uint64_t>(horizon));

  const Matrix closed = system_.a() + system_.b() * gain;
  Matrix states(n, horizon);
  states.col(0) = x0;
  for (Index t = 1; t < horizon; ++t) {
    if (!(states.col(t - 1).stableNorm() <= abort_norm)) {
      return states.leftCols(t);
    }
    states.col(t).noalias() = closed * states.col(t - 1);
  }
  return states;
}

BudgetUsage SystemOracle::usage() const noexcept {
  return {probes_.load(), rollouts_.load(), steps_.load()};
}

}  // namespace lts
