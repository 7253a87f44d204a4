#pragma once

#include <cstdint>
#include <vector>

#include "lts/linalg.hpp"
#include "lts/rng.hpp"

namespace lts {

/// Discrete-time LTI plant x_{t+1} = A x_t + B u_t.
///
/// Immutable after construction. The matrices are the hidden truth of an
/// experiment: learners interact with a SystemOracle and never see them.
class LtiSystem {
 public:
  /// Throws DimensionError on inconsistent shapes and ValidationError on
  /// non-finite entries.
  LtiSystem(Matrix a, Matrix b);

  const Matrix& a() const noexcept { return a_; }
  const Matrix& b() const noexcept { return b_; }
  Index state_dim() const noexcept { return a_.rows(); }
  Index input_dim() const noexcept { return b_.cols(); }

  /// One transition: returns A x + B u.
  Vector step(const Vector& x, const Vector& u) const;

 private:
  Matrix a_;
  Matrix b_;
};

struct InitialStateSpec {
  Index dim = 1;
  double radius = 1.0;  // ||x0||; sqrt(dim) gives E[x0 x0^T] = I

  static InitialStateSpec isotropic(Index dim);
};

struct SpectrumReport {
  std::vector<double> eigenvalue_moduli;  // descending
  Index unstable_count = 0;
  double margin = 0.0;
};

inline constexpr double kDefaultUnstableMargin = 1e-9;

/// Linearized, Euler-discretized cart-pole (dt = 0.25, g = 10, unit masses
/// and pole length). Eigenvalues {1, 1, 1 +- sqrt(1.25)}.
LtiSystem build_cartpole();

/// Linearized inverted pendulum (g = 10, m = 1, l = 1, dt = 0.25).
LtiSystem build_pendulum();

/// Embeds `nominal` in a target_dim-state plant by appending a random
/// symmetric block of spectral norm 1/2 and matching random input rows of
/// norm 1/2. The nominal spectrum is preserved exactly.
LtiSystem augment_system(const LtiSystem& nominal, Index target_dim,
                         std::uint64_t seed);

/// Random symmetric A with spectral radius 2 and B of unit spectral norm.
LtiSystem build_random_system(Index dim, Index inputs, std::uint64_t seed);

enum class ThreeStateKind { kDiagonalPair, kJordanPair };

/// Three-state test plant S blkdiag(U, s) S^{-1} with a fixed well-conditioned
/// similarity S. The unstable 2x2 block U is diag(m, -m) for kDiagonalPair
/// and the Jordan block [[m, 1], [0, m]] (gm = 1) for kJordanPair; `stable`
/// is the remaining real eigenvalue. B = (1, 1, 1)^T.
LtiSystem build_three_state(ThreeStateKind kind, double unstable_modulus,
                            double stable_eigenvalue);

/// Counts eigenvalue moduli >= 1 - margin.
SpectrumReport count_unstable(const LtiSystem& sys,
                              double margin = kDefaultUnstableMargin);
SpectrumReport count_unstable(const Matrix& a,
                              double margin = kDefaultUnstableMargin);

/// Uniform draw on the sphere of radius spec.radius.
Vector sample_initial_state(const InitialStateSpec& spec, Rng& rng);

/// Rank of [B, AB, ..., A^{n-1}B] with a relative SVD threshold.
Index controllability_rank(const LtiSystem& sys, double rel_tol = 1e-10);

}  // namespace lts
