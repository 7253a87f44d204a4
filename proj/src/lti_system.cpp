#include "lts/lti_system.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "lts/errors.hpp"

namespace lts {
namespace {

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  Matrix g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = rng.normal();
  return g;
}

}  // namespace

LtiSystem::LtiSystem(Matrix a, Matrix b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() == 0 || a_.rows() != a_.cols()) {
    throw DimensionError("LtiSystem: A must be square and non-empty");
  }
  if (b_.rows() != a_.rows() || b_.cols() == 0) {
    throw DimensionError("LtiSystem: B must have n_x rows and >= 1 column");
  }
  if (!a_.allFinite() || !b_.allFinite()) {
    throw ValidationError("LtiSystem: non-finite matrix entries");
  }
}

Vector LtiSystem::step(const Vector& x, const Vector& u) const {
  if (x.size() != state_dim() || u.size() != input_dim()) {
    throw DimensionError("LtiSystem::step: dimension mismatch");
  }
  return a_ * x + b_ * u;
}

InitialStateSpec InitialStateSpec::isotropic(Index dim) {
  return {dim, std::sqrt(static_cast<double>(dim))};
}

LtiSystem build_cartpole() {
  Matrix a(4, 4);
  a << 1, 0.25, 0, 0,
       0, 1, -2.5, 0,
       0, 0, 1, 0.25,
       0, 0, 5, 1;
  Matrix b(4, 1);
  b << 0, 0.25, 0, -0.25;
  return {a, b};
}

LtiSystem build_pendulum() {
  constexpr double g = 10.0, m = 1.0, lp = 1.0, dt = 0.25;
  Matrix a(2, 2);
  a << 1, dt,
       g / lp * dt, 1;
  Matrix b(2, 1);
  b << 0, dt / (m * lp * lp);
  return {a, b};
}

LtiSystem augment_system(const LtiSystem& nominal, Index target_dim,
                         std::uint64_t seed) {
  const Index n0 = nominal.state_dim();
  const Index m = nominal.input_dim();
  if (target_dim <= n0) {
    throw DimensionError("augment_system: target_dim must exceed the nominal dimension");
  }
  const Index k = target_dim - n0;
  Rng rng(seed);
  const Matrix g = gaussian_matrix(k, k, rng);
  const Matrix sym = g + g.transpose();
  const Matrix bt = gaussian_matrix(k, m, rng);

  Matrix a = Matrix::Zero(target_dim, target_dim);
  a.topLeftCorner(n0, n0) = nominal.a();
  a.bottomRightCorner(k, k) = 0.5 * sym / spectral_norm(sym);
  Matrix b(target_dim, m);
  b.topRows(n0) = nominal.b();
  b.bottomRows(k) = 0.5 * bt / spectral_norm(bt);
  return {a, b};
}

LtiSystem build_random_system(Index dim, Index inputs, std::uint64_t seed) {
  if (dim < 1 || inputs < 1) {
    throw DimensionError("build_random_system: dim and inputs must be >= 1");
  }
  Rng rng(seed);
  const Matrix at = gaussian_matrix(dim, dim, rng);
  const Matrix sym = at + at.transpose();
  const Matrix bt = gaussian_matrix(dim, inputs, rng);
  return {2.0 * sym / spectral_norm(sym), bt / spectral_norm(bt)};
}

LtiSystem build_three_state(ThreeStateKind kind, double unstable_modulus,
                            double stable_eigenvalue) {
  Matrix s(3, 3);
  s << 1.0, 0.3, 0.2,
       0.1, 1.0, 0.4,
       0.3, -0.2, 1.0;
  Matrix block = Matrix::Zero(3, 3);
  if (kind == ThreeStateKind::kDiagonalPair) {
    block(0, 0) = unstable_modulus;
    block(1, 1) = -unstable_modulus;
  } else {
    block(0, 0) = unstable_modulus;
    block(0, 1) = 1.0;
    block(1, 1) = unstable_modulus;
  }
  block(2, 2) = stable_eigenvalue;
  const Matrix a = s * block * s.inverse();
  return {a, Matrix::Ones(3, 1)};
}

SpectrumReport count_unstable(const Matrix& a, double margin) {
  if (margin < 0.0) throw ValidationError("count_unstable: margin must be >= 0");
  const ComplexVector ev = eigenvalues(a);
  SpectrumReport report;
  report.margin = margin;
  report.eigenvalue_moduli.reserve(static_cast<std::size_t>(ev.size()));
  for (Index i = 0; i < ev.size(); ++i) {
    report.eigenvalue_moduli.push_back(std::abs(ev(i)));
  }
  std::sort(report.eigenvalue_moduli.begin(), report.eigenvalue_moduli.end(),
            std::greater<>());
  report.unstable_count = static_cast<Index>(std::count_if(
      report.eigenvalue_moduli.begin(), report.eigenvalue_moduli.end(),
      [margin](double v) { return v >= 1.0 - margin; }));
  return report;
}

SpectrumReport count_unstable(const LtiSystem& sys, double margin) {
  return count_unstable(sys.a(), margin);
}

Vector sample_initial_state(const InitialStateSpec& spec, Rng& rng) {
  if (spec.dim < 1) throw DimensionError("sample_initial_state: dim must be >= 1");
  if (!(spec.radius > 0.0)) {
    throw ValidationError("sample_initial_state: radius must be positive");
  }
  Vector x(spec.dim);
  double norm = 0.0;
  do {
    for (Index i = 0; i < spec.dim; ++i) x(i) = rng.normal();
    norm = x.norm();
  } while (norm == 0.0);
  return x * (spec.radius / norm);
}

Index controllability_rank(const LtiSystem& sys, double rel_tol) {
  const Index n = sys.state_dim();
  const Index m = sys.input_dim();
  Matrix ctrb(n, n * m);
  Matrix block = sys.b();
  for (Index k = 0; k < n; ++k) {
    ctrb.middleCols(k * m, m) = block;
    block = sys.a() * block;
  }
  Eigen::JacobiSVD<Matrix> svd(ctrb);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > rel_tol * sv(0)) ++rank;
  }
  return rank;
}

}  // namespace lts
