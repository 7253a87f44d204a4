#include "lts/lqr.hpp"

#include <cmath>
#include <sstream>

#include "lts/errors.hpp"

namespace lts {
namespace {

constexpr int kMaxDoublings = 200;
constexpr int kMaxRiccatiIterations = 1000000;

bool symmetric(const Matrix& m, double tol) {
  return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

void check_gain(const LqrProblem& prob, const Matrix& gain) {
  if (gain.rows() != prob.b.cols() || gain.cols() != prob.a.rows()) {
    throw DimensionError("LQR: gain must be n_u x n");
  }
}

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw ValidationError("LQR: gamma must lie in (0, 1]");
  }
}

}  // namespace

void CostMatrices::validate() const {
  for (const Matrix* m : {&q, &r}) {
    if (m->rows() == 0 || !symmetric(*m, 1e-12)) {
      throw ValidationError("CostMatrices: Q and R must be symmetric");
    }
    if (!(min_symmetric_eigenvalue(*m) > 0.0)) {
      throw ValidationError("CostMatrices: Q and R must be positive definite");
    }
  }
}

CostMatrices CostMatrices::scaled_identity(Index n, Index m, double q_scale,
                                           double r_scale) {
  CostMatrices c{q_scale * Matrix::Identity(n, n), r_scale * Matrix::Identity(m, m)};
  c.validate();
  return c;
}

LqrProblem LqrProblem::full(const LtiSystem& sys, const CostMatrices& costs) {
  if (costs.q.rows() != sys.state_dim() || costs.r.rows() != sys.input_dim()) {
    throw DimensionError("LqrProblem::full: cost dimensions");
  }
  return {sys.a(), sys.b(), costs.q, costs.r};
}

LqrProblem LqrProblem::projected(const LtiSystem& sys, const Matrix& phi,
                                 const CostMatrices& costs) {
  if (phi.rows() != sys.state_dim()) {
    throw DimensionError("LqrProblem::projected: phi must have n_x rows");
  }
  if (costs.q.rows() != sys.state_dim() || costs.r.rows() != sys.input_dim()) {
    throw DimensionError("LqrProblem::projected: cost dimensions");
  }
  return {phi.transpose() * sys.a() * phi, phi.transpose() * sys.b(),
          phi.transpose() * costs.q * phi, costs.r};
}

LyapunovSolution solve_lyapunov(const Matrix& m_closed, const Matrix& w) {
  if (m_closed.rows() != m_closed.cols() || w.rows() != m_closed.rows() ||
      w.cols() != w.rows()) {
    throw DimensionError("solve_lyapunov: shape mismatch");
  }
  const double rho = spectral_radius(m_closed);
  if (!(rho < 1.0)) {
    std::ostringstream msg;
    msg << "solve_lyapunov: closed loop not stable (rho = " << rho << ")";
    throw InstabilityError(msg.str());
  }
  Matrix p = w;
  Matrix mk = m_closed;
  auto residual_of = [&](const Matrix& pp) {
    return (pp - w - m_closed.transpose() * pp * m_closed).norm();
  };
  double residual = residual_of(p);
  for (int k = 0; k < kMaxDoublings; ++k) {
    if (residual < 1e-12 * p.norm()) break;
    const Matrix inc = mk.transpose() * p * mk;
    p += inc;
    p = 0.5 * (p + p.transpose());
    mk = mk * mk;
    residual = residual_of(p);
    if (!p.allFinite()) throw NumericalError("solve_lyapunov: overflow");
    if (inc.norm() <= 1e-17 * p.norm()) break;  // no further progress possible
  }
  if (!(residual <= 1e-9 * (1.0 + p.norm()))) {
    std::ostringstream msg;
    msg << "solve_lyapunov: no convergence (residual " << residual << ")";
    throw NumericalError(msg.str());
  }
  return {p, residual};
}

Matrix damped_closed_loop(const LqrProblem& prob, const Matrix& gain,
                          double gamma) {
  check_gain(prob, gain);
  check_gamma(gamma);
  return std::sqrt(gamma) * (prob.a + prob.b * gain);
}

LyapunovSolution cost_matrix(const LqrProblem& prob, const Matrix& gain,
                             double gamma) {
  const Matrix m = damped_closed_loop(prob, gain, gamma);
  const Matrix w = prob.q + gain.transpose() * prob.r * gain;
  return solve_lyapunov(m, w);
}

double lqr_cost(const LqrProblem& prob, const Matrix& gain, double gamma) {
  return cost_matrix(prob, gain, gamma).p.trace();
}

double lqr_cost_via_covariance(const LqrProblem& prob, const Matrix& gain,
                               double gamma) {
  const Matrix m = damped_closed_loop(prob, gain, gamma);
  const Index n = m.rows();
  const Matrix sigma = solve_lyapunov(m.transpose(), Matrix::Identity(n, n)).p;
  return (sigma * (prob.q + gain.transpose() * prob.r * gain)).trace();
}

Matrix lqr_gradient(const LqrProblem& prob, const Matrix& gain, double gamma) {
  const Matrix m = damped_closed_loop(prob, gain, gamma);
  const Index n = m.rows();
  const Matrix p = solve_lyapunov(m, prob.q + gain.transpose() * prob.r * gain).p;
  const Matrix sigma = solve_lyapunov(m.transpose(), Matrix::Identity(n, n)).p;
  const double sg = std::sqrt(gamma);
  const Matrix ag = sg * prob.a;
  const Matrix bg = sg * prob.b;
  const Matrix e = (prob.r + bg.transpose() * p * bg) * gain + bg.transpose() * p * ag;
  return 2.0 * e * sigma;
}

double exact_cost(const LtiSystem& sys, const Matrix& k_full, double gamma,
                  const CostMatrices& costs) {
  return lqr_cost(LqrProblem::full(sys, costs), k_full, gamma);
}

double exact_cost(const LtiSystem& sys, const Matrix& theta, const Matrix& phi,
                  double gamma, const CostMatrices& costs) {
  return lqr_cost(LqrProblem::projected(sys, phi, costs), theta, gamma);
}

Matrix exact_gradient(const LtiSystem& sys, const Matrix& theta,
                      const Matrix& phi, double gamma,
                      const CostMatrices& costs) {
  return lqr_gradient(LqrProblem::projected(sys, phi, costs), theta, gamma);
}

DareSolution solve_dare(const LqrProblem& prob, double gamma) {
  check_gamma(gamma);
  const double sg = std::sqrt(gamma);
  const Matrix ag = sg * prob.a;
  const Matrix bg = sg * prob.b;
  Matrix p = prob.q;
  Matrix k = Matrix::Zero(prob.b.cols(), prob.a.rows());
  for (int it = 1; it <= kMaxRiccatiIterations; ++it) {
    const Matrix s = prob.r + bg.transpose() * p * bg;
    k = -s.ldlt().solve(bg.transpose() * p * ag);
    const Matrix cl = ag + bg * k;
    Matrix next = prob.q + k.transpose() * prob.r * k + cl.transpose() * p * cl;
    next = 0.5 * (next + next.transpose());
    if (!next.allFinite() || next.norm() > 1e14) {
      throw FeasibilityError("solve_dare: Riccati iteration diverged; damped pair not stabilizable");
    }
    const double change = (next - p).norm();
    p = std::move(next);
    if (change <= 1e-12 * p.norm()) {
      const Matrix s_final = prob.r + bg.transpose() * p * bg;
      k = -s_final.ldlt().solve(bg.transpose() * p * ag);
      if (!(spectral_radius(ag + bg * k) < 1.0)) {
        throw FeasibilityError("solve_dare: converged gain is not stabilizing");
      }
      return {p, k, p.trace(), it};
    }
  }
  throw FeasibilityError("solve_dare: no convergence");
}

}  // namespace lts
