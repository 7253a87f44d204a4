#include "lts/adjoint.hpp"

#include <string>

#include "lts/errors.hpp"

namespace lts {

std::vector<Vector> probe_columns(SystemOracle& oracle) {
  std::vector<Vector> probes;
  probes.reserve(static_cast<std::size_t>(oracle.state_dim()));
  for (Index i = 0; i < oracle.state_dim(); ++i) {
    probes.push_back(oracle.probe(i));
  }
  return probes;
}

AdjointDataMatrix adjoint_trajectory(const std::vector<Vector>& probes,
                                     const Vector& x0, Index horizon) {
  const auto n = static_cast<Index>(probes.size());
  if (n == 0 || x0.size() != n) {
    throw DimensionError("adjoint_trajectory: need n_x probes matching x0");
  }
  for (const auto& p : probes) {
    if (p.size() != n) throw DimensionError("adjoint_trajectory: probe size");
  }
  if (horizon < 1) throw ValidationError("adjoint_trajectory: horizon < 1");

  // Stacking the probes as rows gives A^T; keep the element-wise form
  // x_{t+1}(i) = <e_i^+, x_t> explicit.
  Matrix probe_rows(n, n);
  for (Index i = 0; i < n; ++i) probe_rows.row(i) = probes[static_cast<std::size_t>(i)].transpose();

  AdjointDataMatrix data;
  data.probe_vectors = probes;
  data.d.resize(n, horizon);
  Vector x = x0;
  for (Index t = 0; t < horizon; ++t) {
    x = probe_rows * x;
    const double norm = x.stableNorm();
    if (!(norm <= kAdjointOverflowGuard)) {
      throw DivergenceError("adjoint_trajectory: column " + std::to_string(t + 1) +
                                " exceeded the overflow guard",
                            t + 1);
    }
    data.d.col(t) = x;
  }
  return data;
}

}  // namespace lts
