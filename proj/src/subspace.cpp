#include "lts/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "lts/errors.hpp"
#include "lts/lti_system.hpp"

namespace lts {
namespace {

// Swaps the adjacent diagonal entries k, k+1 of the upper-triangular Schur
// factor with a unitary rotation, keeping Z^H M Z = T.
void swap_schur_pair(ComplexMatrix& t, ComplexMatrix& z, Index k) {
  using C = std::complex<double>;
  const C t11 = t(k, k);
  const C t22 = t(k + 1, k + 1);
  Eigen::Vector2cd v(t(k, k + 1), t22 - t11);
  const double nv = v.norm();
  if (nv == 0.0) return;  // identical eigenvalues, nothing to reorder
  v /= nv;
  Eigen::Matrix2cd g;
  g << v(0), -std::conj(v(1)),
       v(1), std::conj(v(0));
  t.middleRows(k, 2) = g.adjoint() * t.middleRows(k, 2);
  t.middleCols(k, 2) = t.middleCols(k, 2) * g;
  z.middleCols(k, 2) = z.middleCols(k, 2) * g;
  t(k + 1, k) = C(0.0, 0.0);
}

}  // namespace

SubspaceEstimate SubspaceEstimate::identity(Index dim) {
  SubspaceEstimate est;
  est.phi_hat = Matrix::Identity(dim, dim);
  est.singular_values.assign(static_cast<std::size_t>(dim), 1.0);
  est.horizon_used = 0;
  return est;
}

SubspaceEstimate estimate_subspace(const Matrix& d, Index ell) {
  const Index max_ell = std::min(d.rows(), d.cols());
  if (ell < 1 || ell > max_ell) {
    throw DimensionError("estimate_subspace: ell must lie in [1, min(n_x, T)]");
  }
  if (!d.allFinite()) throw ValidationError("estimate_subspace: non-finite data");
  Eigen::JacobiSVD<Matrix> svd(d, Eigen::ComputeThinU);
  if (svd.info() != Eigen::Success) {
    throw NumericalError("estimate_subspace: SVD did not converge");
  }
  SubspaceEstimate est;
  est.phi_hat = svd.matrixU().leftCols(ell);
  const auto& sv = svd.singularValues();
  est.singular_values.assign(sv.data(), sv.data() + sv.size());
  est.horizon_used = d.cols();
  return est;
}

SubspaceEstimate estimate_subspace(const AdjointDataMatrix& data, Index ell) {
  return estimate_subspace(data.d, ell);
}

Index suggest_ell(const std::vector<double>& sv) {
  Index best = 1;
  double best_ratio = 0.0;
  for (std::size_t k = 0; k + 1 < sv.size(); ++k) {
    const double ratio = sv[k + 1] > 0.0 ? sv[k] / sv[k + 1]
                                         : std::numeric_limits<double>::infinity();
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = static_cast<Index>(k + 1);
    }
    if (sv[k + 1] == 0.0) break;
  }
  return best;
}

double singular_gap(const std::vector<double>& sv, Index ell) {
  if (ell < 1 || static_cast<std::size_t>(ell) > sv.size()) {
    throw DimensionError("singular_gap: ell out of range");
  }
  const double next = static_cast<std::size_t>(ell) < sv.size()
                          ? sv[static_cast<std::size_t>(ell)]
                          : 0.0;
  return sv[static_cast<std::size_t>(ell - 1)] - next;
}

Matrix true_left_unstable_basis(const Matrix& a, double margin) {
  if (a.rows() != a.cols()) {
    throw DimensionError("true_left_unstable_basis: matrix is not square");
  }
  if (!a.allFinite()) throw ValidationError("true_left_unstable_basis: non-finite");
  const Index n = a.rows();
  const double threshold = 1.0 - margin;

  // Classification uses the real eigensolver, which resolves the exactly
  // repeated marginal eigenvalues of block-triangular plants. Only moduli just
  // below the threshold are ambiguous: they would be dropped by a rounding
  // error's worth of perturbation.
  const SpectrumReport report = count_unstable(a, margin);
  for (double mod : report.eigenvalue_moduli) {
    if (mod < threshold && threshold - mod <= kAmbiguityBand) {
      std::ostringstream msg;
      msg << "true_left_unstable_basis: eigenvalue modulus " << mod
          << " is within " << kAmbiguityBand << " of the threshold " << threshold;
      throw AmbiguousSpectrumError(msg.str());
    }
  }
  const Index ell = report.unstable_count;
  if (ell == 0) return Matrix(n, 0);

  Eigen::ComplexSchur<ComplexMatrix> schur(a.transpose().cast<std::complex<double>>());
  if (schur.info() != Eigen::Success) {
    throw NumericalError("true_left_unstable_basis: Schur iteration failed");
  }
  ComplexMatrix t = schur.matrixT();
  ComplexMatrix z = schur.matrixU();

  // A defective eigenvalue splits by O(sqrt(eps)) on the Schur diagonal, so
  // the Schur entries are selected by rank (the ell largest moduli) rather
  // than by comparison with the threshold.
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&t](Index i, Index j) {
    return std::abs(t(i, i)) > std::abs(t(j, j));
  });
  std::vector<bool> selected(static_cast<std::size_t>(n), false);
  for (Index k = 0; k < ell; ++k) selected[static_cast<std::size_t>(order[k])] = true;

  Index next = 0;
  for (Index i = 0; i < n; ++i) {
    if (selected[static_cast<std::size_t>(i)]) {
      for (Index k = i - 1; k >= next; --k) swap_schur_pair(t, z, k);
      ++next;
    }
  }

  // The selected eigenvalue set is closed under conjugation, so the real and
  // imaginary parts of the complex basis span a real ell-dimensional space.
  Matrix stacked(n, 2 * ell);
  stacked.leftCols(ell) = z.leftCols(ell).real();
  stacked.rightCols(ell) = z.leftCols(ell).imag();
  Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(ell);
}

bool is_orthonormal(const Matrix& phi, double tol) {
  const Matrix gram = phi.transpose() * phi;
  return (gram - Matrix::Identity(phi.cols(), phi.cols())).cwiseAbs().maxCoeff() <= tol;
}

double subspace_distance(const Matrix& phi_a, const Matrix& phi_b) {
  if (phi_a.rows() != phi_b.rows() || phi_a.cols() != phi_b.cols()) {
    throw DimensionError("subspace_distance: bases must have equal shape");
  }
  if (!is_orthonormal(phi_a) || !is_orthonormal(phi_b)) {
    throw ValidationError("subspace_distance: bases must be orthonormal");
  }
  const Matrix diff = phi_a * phi_a.transpose() - phi_b * phi_b.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(diff, Eigen::EigenvaluesOnly);
  return std::min(1.0, solver.eigenvalues().cwiseAbs().maxCoeff());
}

Matrix orthonormal_complement(const Matrix& phi) {
  const Index n = phi.rows();
  Eigen::HouseholderQR<Matrix> qr(phi);
  const Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  return q.rightCols(n - phi.cols());
}

double subspace_distance_via_complement(const Matrix& phi_hat, const Matrix& phi) {
  if (phi_hat.rows() != phi.rows() || phi_hat.cols() != phi.cols()) {
    throw DimensionError("subspace_distance_via_complement: shape mismatch");
  }
  const Matrix perp = orthonormal_complement(phi);
  if (perp.cols() == 0) return 0.0;
  const Matrix cross = phi_hat.transpose() * perp;
  Eigen::JacobiSVD<Matrix> svd(cross);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

std::string singular_values_csv(const std::vector<double>& sv) {
  std::ostringstream out;
  out.precision(17);
  out << "index,value\n";
  for (std::size_t i = 0; i < sv.size(); ++i) out << (i + 1) << ',' << sv[i] << '\n';
  return out.str();
}

}  // namespace lts
