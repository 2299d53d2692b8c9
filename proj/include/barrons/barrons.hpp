#pragma once

#include <vector>

#include "barrons/domain.hpp"
#include "barrons/simplex_solver.hpp"

namespace barrons {

/// One played point and the gradient observed at it.
struct PlayedRound {
  Vector x;
  Vector gradient;
};

/// Learner state of barrier-regularized Online Newton Step for one epoch.
///
/// The regularizer at round t is
///   psi_t(x) = (beta/2) x^T A_t x + sum_i (1/eta_{t,i}) ln(1/x_i),
/// with A_t = N*I + sum_{s<=t} g_s g_s^T and
///   eta_{t,i} = eta_base * exp(max_{s<=t} log_T(1/(N x_{s,i}))).
/// `round` is the 1-based index of the round about to be played.
struct BarronsState {
  ProblemDims dims;
  int round = 1;
  PortfolioState x;
  Matrix covariance;  // A_{round-1}
  Vector log_max;     // running max of log_T(1/(N x_{s,i})), floored at 0
  Vector learning_rates;
  double beta = 0.5;
  double eta_base = 0.0;
  std::vector<PlayedRound> history;
};

/// Fresh state: uniform x, A_0 = N*I, every learning rate equal to eta_base.
/// Requires 0 < beta <= 1/2 and 0 < eta_base <= 1.
BarronsState barrons_init(const ProblemDims& dims, double beta, double eta_base);

struct BarronsStepResult {
  LossRecord loss;
  SolveStats solve;
};

/// Plays state.x against `r`, then updates A, the learning rates (using the
/// point just played) and solves the mirror-descent step for the next point,
/// warm-started at the current one. Solver failures propagate and leave
/// `state` untouched.
BarronsStepResult barrons_step(BarronsState& state, const MarketRound& r,
                               const SolverConfig& solver);

/// Mirror-descent step objective <x - x_t, g> + D_psi(x, x_t) with the
/// constant terms dropped; exposed for the solver oracle tests.
Objective omd_step_objective(const Vector& x_t, const Vector& gradient, const Matrix& covariance,
                             double beta, const Vector& learning_rates);

/// D_psi(x, y) = (beta/2)(x-y)^T A (x-y) + sum_i (1/eta_i) h(x_i/y_i),
/// h(z) = z - 1 - ln z. Nonnegative for positive x, y.
double bregman_divergence(const Vector& x, const Vector& y, const Matrix& covariance, double beta,
                          const Vector& learning_rates);

/// log base T.
double log_base(double value, int horizon);

}  // namespace barrons
