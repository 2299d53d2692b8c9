#pragma once

#include <optional>
#include <string>
#include <vector>

#include "barrons/barrons.hpp"

namespace barrons {

struct AdaConfig {
  double beta_init = 0.5;
  double eta_base = 0.0;
  double gamma = 1.0 / 25.0;

  /// beta = 1/2, eta = 1/(2048 N (ln T)^2), gamma = 1/25.
  static AdaConfig defaults(const ProblemDims& dims);

  /// Requires 0 < beta <= 1/2, 0 < eta <= 1/300 and 0 < gamma <= 1/25; the
  /// stability guarantees for the iterates and the leader need the last two.
  void validate() const;
};

/// Largest epoch count compatible with alpha >= 1/(16NT): ceil(log2(32NT)) + 1.
int max_epoch_count(const ProblemDims& dims);

/// Bound on |x_{t+1,i}/x_{t,i} - 1| within an epoch: sqrt(3 eta)/2.
double iterate_stability_bound(double eta_base);
/// Bound on |u_{t+1,i}/u_{t,i} - 1| within an epoch: sqrt(gamma)/2.
double leader_stability_bound(double gamma);
/// Slack added to both stability bounds to absorb solver tolerance.
inline constexpr double kStabilitySlack = 1e-8;

struct AdaState {
  AdaConfig cfg;
  BarronsState inner;
  int epoch_index = 1;
  int global_round = 1;
  std::vector<MarketRound> epoch_rounds;
  std::optional<PortfolioState> leader;
  // alpha_{t-1}(u_{t-1}) and a_{t-1} of the previous round in this epoch.
  std::optional<double> prev_alpha;
  std::optional<double> prev_ratio_max;

  double beta() const { return inner.beta; }
};

AdaState ada_init(const ProblemDims& dims, const AdaConfig& cfg);

/// argmin over the clipped simplex of sum_s -ln<u, r_s> + (1/gamma) sum_i ln(1/u_i).
SolveResult regularized_leader(const std::vector<MarketRound>& epoch_rounds, double gamma,
                               const PortfolioState& warm_start, const ProblemDims& dims,
                               const SolverConfig& solver);

/// The leader's objective, exposed for the oracle tests.
Objective regularized_leader_objective(const std::vector<MarketRound>& epoch_rounds, double gamma);

/// alpha_t(u) = min(1/2, min_s 1/(8 |<u - x_s, g_s>|)); terms with a zero
/// inner product impose no constraint.
double alpha(const Vector& u, const std::vector<PlayedRound>& history);

/// a_t = max_{s,i} u_i / x_{s,i} over the given history.
double ratio_max(const Vector& u, const std::vector<PlayedRound>& history);

struct AdaStepResult {
  // Quantities of the round just played.
  int global_round = 0;
  int epoch_index = 0;
  int epoch_round = 0;
  double beta = 0.0;
  Vector played;
  LossRecord loss;
  Vector learning_rates;  // eta_{t,i} used for the step to x_{t+1}

  Vector leader;  // u_t
  double alpha = 0.0;
  double ratio_max = 0.0;
  bool restart = false;

  // max_i |x_{t+1,i}/x_{t,i} - 1|; absent when the step was discarded by a restart.
  std::optional<double> iterate_ratio_dev;
  // max_i |u_{t,i}/u_{t-1,i} - 1|; absent on the first round of an epoch.
  std::optional<double> leader_ratio_dev;

  std::vector<std::string> violations;
};

/// One round of the adaptive-beta wrapper:
///   1. delegate to barrons_step (plays x_t, computes x_{t+1});
///   2. recompute the leader u_t from this epoch's rounds;
///   3. evaluate alpha_t(u_t) over this epoch's history;
///   4. if beta > alpha_t(u_t), halve beta and restart from a fresh state
///      (x_{t+1} is discarded, the next round plays uniform).
/// Runtime invariant checks are reported in `violations`; exceeding the epoch
/// bound throws InvariantViolation.
AdaStepResult ada_step(AdaState& state, const MarketRound& r, const SolverConfig& solver);

}  // namespace barrons
