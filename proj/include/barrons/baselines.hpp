#pragma once

#include <memory>
#include <string>
#include <vector>

#include "barrons/domain.hpp"
#include "barrons/simplex_solver.hpp"

namespace barrons {

struct LearnerStep {
  Vector played;
  LossRecord loss;
};

/// Uniform stepping interface shared by every comparison algorithm.
class OnlineLearner {
 public:
  virtual ~OnlineLearner() = default;
  virtual std::string name() const = 0;
  /// True when plays are confined to the clipped simplex.
  virtual bool clipped() const = 0;
  /// The point the next call to step() will play.
  virtual Vector next_play() const = 0;
  virtual LearnerStep step(const MarketRound& r) = 0;
};

// --- Online Newton Step ----------------------------------------------------

struct OnsConfig {
  double beta = 0.5;
  /// Played point is (1 - mix) x + mix/N. Zero disables mixing.
  double mix = 0.0;
};

struct OnsState {
  ProblemDims dims;
  OnsConfig cfg;
  PortfolioState x;   // internal iterate on the clipped simplex
  Matrix covariance;  // A_t, starts at N*I
};

OnsState ons_init(const ProblemDims& dims, const OnsConfig& cfg);
Vector ons_play(const OnsState& state);
/// Plays the (mixed) point, adds g g^T to A and solves
/// argmin <x - x_t, g> + (beta/2)(x - x_t)^T A (x - x_t) over the clipped simplex.
LearnerStep ons_step(OnsState& state, const MarketRound& r, const SolverConfig& solver);

// --- First-order baselines -------------------------------------------------

/// x'_i = x_i exp(-eta g_i) / sum_j x_j exp(-eta g_j).
Vector eg_update(const Vector& x, const Vector& gradient, double eta);
/// Euclidean projection of x - eta g onto the simplex.
Vector ogd_update(const Vector& x, const Vector& gradient, double eta);
/// x'_i = x_i (1 - eta + eta r_i / <x, r>).
Vector soft_bayes_update(const Vector& x, const MarketRound& r, double eta);
/// Sort-based Euclidean projection onto {x >= 0, sum x = 1}.
Vector project_onto_simplex(const Vector& v);

/// sqrt(ln N / T) / g_est.
double default_eg_rate(const ProblemDims& dims, double g_est = 1.0);
/// 1 / sqrt(T).
double default_ogd_rate(const ProblemDims& dims);
/// sqrt(ln N / (N T)).
double default_soft_bayes_rate(const ProblemDims& dims);

// --- Offline comparator ----------------------------------------------------

struct CrpSolution {
  PortfolioState weights;
  double total_loss = 0.0;
};

/// Best constant-rebalanced portfolio over the clipped simplex.
CrpSolution best_crp(const std::vector<MarketRound>& rounds, const ProblemDims& dims,
                     const SolverConfig& solver);

double crp_total_loss(const Vector& u, const std::vector<MarketRound>& rounds);

// --- Universal Portfolio by grid quadrature --------------------------------

/// Wealth-weighted average of the constant-rebalanced portfolios on a uniform
/// grid over the full simplex. N <= 3 only.
class UniversalPortfolioGrid {
 public:
  UniversalPortfolioGrid(int assets, double resolution);
  Vector play() const;
  void observe(const MarketRound& r);
  std::size_t grid_size() const { return points_.size(); }

 private:
  std::vector<Vector> points_;
  std::vector<double> log_wealth_;
};

struct UniversalPortfolioRun {
  std::vector<Vector> plays;
  double total_loss = 0.0;
};

UniversalPortfolioRun universal_portfolio_grid(const std::vector<MarketRound>& rounds,
                                               const ProblemDims& dims, double resolution);

// --- Learner factories -----------------------------------------------------

std::unique_ptr<OnlineLearner> make_ons_learner(const ProblemDims& dims, const OnsConfig& cfg,
                                                const SolverConfig& solver);
std::unique_ptr<OnlineLearner> make_eg_learner(const ProblemDims& dims, double eta);
std::unique_ptr<OnlineLearner> make_ogd_learner(const ProblemDims& dims, double eta);
std::unique_ptr<OnlineLearner> make_soft_bayes_learner(const ProblemDims& dims, double eta);
std::unique_ptr<OnlineLearner> make_universal_grid_learner(const ProblemDims& dims,
                                                           double resolution);

}  // namespace barrons
