#pragma once

#include <atomic>
#include <cstdint>
#include <limits>

#include "lts/lti_system.hpp"

namespace lts {

struct BudgetLimits {
  std::uint64_t max_probes = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t max_rollouts = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t max_steps = std::numeric_limits<std::uint64_t>::max();
};

struct BudgetUsage {
  std::uint64_t probes = 0;
  std::uint64_t rollouts = 0;
  std::uint64_t steps = 0;  // includes the single step of every probe
};

class SystemOracle;

namespace evaluation {
// Matrix access for evaluation and tests only. Learner code never calls this.
const LtiSystem& hidden_system(const SystemOracle& oracle);
}  // namespace evaluation

/// Model-free access to a plant. Learner-facing calls are probe() and
/// rollout(); both are metered by exact, monotone counters.
class SystemOracle {
 public:
  explicit SystemOracle(LtiSystem system, BudgetLimits limits = {});

  SystemOracle(const SystemOracle&) = delete;
  SystemOracle& operator=(const SystemOracle&) = delete;

  Index state_dim() const noexcept { return system_.state_dim(); }
  Index input_dim() const noexcept { return system_.input_dim(); }

  /// Plays one zero-input step from x0 = e_i and returns x1 = A e_i.
  /// Counts one probe and one step.
  Vector probe(Index i);

  /// Closed-loop rollout under u_t = gain x_t. Returns the observed states
  /// x_0 .. x_{horizon-1} as columns. Counts one rollout and `horizon` steps.
  /// Stops early (and still charges the full horizon) once ||x_t|| exceeds
  /// `abort_norm`; the returned matrix then has only the columns up to and
  /// including the offending state.
  Matrix rollout(const Vector& x0, const Matrix& gain, Index horizon,
                 double abort_norm = std::numeric_limits<double>::infinity());

  BudgetUsage usage() const noexcept;
  const BudgetLimits& limits() const noexcept { return limits_; }

 private:
  friend const LtiSystem& evaluation::hidden_system(const SystemOracle&);

  void charge(std::uint64_t probes, std::uint64_t rollouts,
              std::uint64_t steps);

  LtiSystem system_;
  BudgetLimits limits_;
  std::atomic<std::uint64_t> probes_{0};
  std::atomic<std::uint64_t> rollouts_{0};
  std::atomic<std::uint64_t> steps_{0};
};

}  // namespace lts
