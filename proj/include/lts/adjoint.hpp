#pragma once

#include <vector>

#include "lts/oracle.hpp"

namespace lts {

/// Data collected from the autonomous adjoint system x_{t+1} = A^T x_t.
struct AdjointDataMatrix {
  Matrix d;                         // n_x x T, column t-1 holds x_t (x_0 excluded)
  std::vector<Vector> probe_vectors;  // e_i^+ = A e_i

  Index horizon() const noexcept { return d.cols(); }
  Index state_dim() const noexcept { return d.rows(); }
};

inline constexpr double kAdjointOverflowGuard = 1e200;

/// Recovers the columns of A with n_x zero-input unit-vector probes.
std::vector<Vector> probe_columns(SystemOracle& oracle);

/// Rolls the adjoint system forward from x0 using only the stored probes:
/// the i-th entry of x_{t+1} is <e_i^+, x_t>. No oracle access.
/// Throws DivergenceError (step = t) if a column norm exceeds the guard.
AdjointDataMatrix adjoint_trajectory(const std::vector<Vector>& probes,
                                     const Vector& x0, Index horizon);

}  // namespace lts
