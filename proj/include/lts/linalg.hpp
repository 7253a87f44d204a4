#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace lts {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Eigenvalues of a square real matrix computed in complex arithmetic.
/// Throws NumericalError if the QR iteration fails to converge.
ComplexVector eigenvalues(const Matrix& m);

/// Largest eigenvalue modulus of a square real matrix.
double spectral_radius(const Matrix& m);

/// Smallest eigenvalue of a symmetric matrix (equals sigma_min for SPD input).
double min_symmetric_eigenvalue(const Matrix& m);

bool all_finite(const Matrix& m);

}  // namespace lts
