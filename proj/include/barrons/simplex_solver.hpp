#pragma once

#include <functional>
#include <stdexcept>

#include "barrons/domain.hpp"

namespace barrons {

/// A smooth strictly convex objective on the interior of the clipped simplex.
/// The Hessian must be symmetric positive definite on the simplex tangent
/// space wherever it is evaluated.
struct Objective {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> hessian;
};

struct SolverConfig {
  /// Stopping threshold on the squared Newton decrement of each barrier stage.
  double kkt_tol = 1e-10;
  int max_newton_iters = 100;
  double barrier_mu_init = 1.0;
  double barrier_shrink = 0.1;
  double min_barrier_mu = 1e-12;

  /// Throws ValidationError unless every field is in range.
  void validate() const;
};

struct SolveStats {
  int newton_steps = 0;
  int barrier_stages = 0;
  double final_mu = 0.0;
  /// Squared Newton decrement at the returned point and final barrier weight.
  double decrement_sq = 0.0;
  /// Euclidean norm of the barrier problem's Lagrangian gradient
  /// g + nu*1 - lambda (lambda_i = mu / slack_i), nu by least squares.
  double lagrangian_grad_norm = 0.0;
  bool warm_start_accepted = false;
};

struct SolveResult {
  PortfolioState x;
  SolveStats stats;
};

/// Raised when a barrier stage does not converge. Carries the last iterate.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, Vector last_iterate, double residual)
      : std::runtime_error(what), last_iterate_(std::move(last_iterate)), residual_(residual) {}

  const Vector& last_iterate() const { return last_iterate_; }
  double residual() const { return residual_; }

 private:
  Vector last_iterate_;
  double residual_;
};

/// One accepted Newton iterate, reported to an optional observer.
struct NewtonIterate {
  int stage = 0;
  double mu = 0.0;
  double merit = 0.0;  // objective + barrier at this iterate
  double decrement_sq = 0.0;
  double step = 0.0;
};

using IterationObserver = std::function<void(const NewtonIterate&)>;

/// Minimizes `obj` over {x : sum x = 1, x_i >= 1/(NT)}.
///
/// Path-following: adds -mu * sum ln(x_i - 1/(NT)), runs equality-constrained
/// Newton with Armijo backtracking and a fraction-to-the-boundary rule, and
/// shrinks mu geometrically down to `min_barrier_mu`. Stages are warm-started
/// from each other. If the warm start already satisfies the final stage's
/// stopping test after at most three Newton steps it is returned directly.
SolveResult minimize_over_clipped_simplex(const Objective& obj, const PortfolioState& warm_start,
                                          const ProblemDims& dims, const SolverConfig& cfg,
                                          const IterationObserver& observer = {});

/// Brute-force minimizer over a uniform grid of spacing `resolution` on the
/// clipped simplex (N = 2 or 3 only). For N = 2 every grid point is
/// evaluated. For N = 3 every value of the first coordinate is enumerated and
/// the second is found by bisection on forward differences, which recovers
/// the exact grid minimum of the line restriction because the objective is
/// convex. The point with x_N exactly on the floor is always part of a line.
PortfolioState grid_search_oracle(const Objective& obj, const ProblemDims& dims,
                                  double resolution);

}  // namespace barrons
