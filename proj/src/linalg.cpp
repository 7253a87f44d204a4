#include "lts/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "lts/errors.hpp"

namespace lts {

ComplexVector eigenvalues(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("eigenvalues: matrix is not square");
  }
  if (!all_finite(m)) {
    throw ValidationError("eigenvalues: non-finite entries");
  }
  if (m.rows() == 0) return ComplexVector(0);
  Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigenvalues: QR iteration did not converge");
  }
  return solver.eigenvalues();
}

double spectral_radius(const Matrix& m) {
  const ComplexVector ev = eigenvalues(m);
  double rho = 0.0;
  for (Index i = 0; i < ev.size(); ++i) rho = std::max(rho, std::abs(ev(i)));
  return rho;
}

double min_symmetric_eigenvalue(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("min_symmetric_eigenvalue: matrix is not square");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("min_symmetric_eigenvalue: no convergence");
  }
  return solver.eigenvalues().minCoeff();
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace lts
