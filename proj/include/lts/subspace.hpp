#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lts/adjoint.hpp"

namespace lts {

/// Orthonormal basis of the estimated left unstable subspace.
struct SubspaceEstimate {
  Matrix phi_hat;                      // n_x x ell, orthonormal columns
  std::vector<double> singular_values; // of the data matrix, descending
  Index horizon_used = 0;

  Index ell() const noexcept { return phi_hat.cols(); }
  Index state_dim() const noexcept { return phi_hat.rows(); }

  /// Identity "subspace" used by the full-state baseline.
  static SubspaceEstimate identity(Index dim);
};

/// Top-ell left singular vectors of D.
SubspaceEstimate estimate_subspace(const AdjointDataMatrix& data, Index ell);
SubspaceEstimate estimate_subspace(const Matrix& d, Index ell);

/// Index k (1-based) maximizing sigma_k / sigma_{k+1}; a diagnostic only.
Index suggest_ell(const std::vector<double>& singular_values);

/// sigma_ell - sigma_{ell+1} of the data matrix (the empirical gap), or
/// sigma_ell when no (ell+1)-th value exists.
double singular_gap(const std::vector<double>& singular_values, Index ell);

inline constexpr double kAmbiguityBand = 1e-8;

/// Evaluation-only: orthonormal basis of the invariant subspace of A^T for
/// the eigenvalues with modulus >= 1 - margin, via a reordered complex Schur
/// form. Throws AmbiguousSpectrumError if a modulus lies less than 1e-8 below
/// the threshold 1 - margin.
Matrix true_left_unstable_basis(const Matrix& a,
                                double margin = 1e-9);

/// ||Pi_a - Pi_b||_2 for orthonormal bases of equal shape.
double subspace_distance(const Matrix& phi_a, const Matrix& phi_b);

/// ||phi_hat^T phi_perp||_2 with phi_perp an orthonormal complement of phi.
double subspace_distance_via_complement(const Matrix& phi_hat,
                                        const Matrix& phi);

/// Orthonormal basis of the orthogonal complement of col(phi).
Matrix orthonormal_complement(const Matrix& phi);

bool is_orthonormal(const Matrix& phi, double tol = 1e-8);

/// CSV block "index,value" (1-based index).
std::string singular_values_csv(const std::vector<double>& singular_values);

}  // namespace lts
