#pragma once

#include "lts/lti_system.hpp"

namespace lts {

// Model-based ground truth. Used by tests and evaluation, never by the
// learner.

struct CostMatrices {
  Matrix q;
  Matrix r;

  /// Throws ValidationError unless both are symmetric positive definite.
  void validate() const;

  static CostMatrices scaled_identity(Index n, Index m, double q_scale = 1.0,
                                      double r_scale = 1.0);
};

/// Undiscounted LQR data (a, b, state weight q, input weight r). Discounting
/// is applied by the functions below through the damped pair.
struct LqrProblem {
  Matrix a;
  Matrix b;
  Matrix q;
  Matrix r;

  static LqrProblem full(const LtiSystem& sys, const CostMatrices& costs);
  /// (Phi^T A Phi, Phi^T B, Phi^T Q Phi, R).
  static LqrProblem projected(const LtiSystem& sys, const Matrix& phi,
                              const CostMatrices& costs);
};

struct LyapunovSolution {
  Matrix p;
  double residual = 0.0;  // ||P - W - M^T P M||_F
};

/// Solves P = W + M^T P M for Schur-stable M by doubling.
LyapunovSolution solve_lyapunov(const Matrix& m_closed, const Matrix& w);

/// Damped closed loop sqrt(gamma) (A + B K).
Matrix damped_closed_loop(const LqrProblem& prob, const Matrix& gain,
                          double gamma);

/// P of the discounted cost for u = gain z: P = Q + K^T R K + M^T P M.
LyapunovSolution cost_matrix(const LqrProblem& prob, const Matrix& gain,
                             double gamma);

/// J = tr(P) (isotropic initial state). Throws InstabilityError if the damped
/// closed loop is not Schur stable.
double lqr_cost(const LqrProblem& prob, const Matrix& gain, double gamma);

/// Same cost through the state-covariance route tr(Sigma (Q + K^T R K)).
double lqr_cost_via_covariance(const LqrProblem& prob, const Matrix& gain,
                               double gamma);

/// 2 [(R + B_g^T P B_g) K + B_g^T P A_g] Sigma.
Matrix lqr_gradient(const LqrProblem& prob, const Matrix& gain, double gamma);

double exact_cost(const LtiSystem& sys, const Matrix& k_full, double gamma,
                  const CostMatrices& costs);
double exact_cost(const LtiSystem& sys, const Matrix& theta, const Matrix& phi,
                  double gamma, const CostMatrices& costs);
Matrix exact_gradient(const LtiSystem& sys, const Matrix& theta,
                      const Matrix& phi, double gamma,
                      const CostMatrices& costs);

struct DareSolution {
  Matrix p;
  Matrix k;  // u = k z
  double cost = 0.0;  // tr(P)
  int iterations = 0;
};

/// Riccati fixed-point iteration on the damped pair. Throws FeasibilityError
/// if the iteration diverges (pair not stabilizable at this gamma).
DareSolution solve_dare(const LqrProblem& prob, double gamma);

}  // namespace lts
