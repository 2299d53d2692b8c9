#include "barrons/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace barrons {

OnsState ons_init(const ProblemDims& dims, const OnsConfig& cfg) {
  if (!(cfg.beta > 0.0)) throw ValidationError("ONS beta must be positive");
  if (!(cfg.mix >= 0.0 && cfg.mix < 1.0)) throw ValidationError("ONS mix must lie in [0, 1)");
  const int n = dims.assets();
  return OnsState{dims, cfg, PortfolioState::uniform(n), n * Matrix::Identity(n, n)};
}

Vector ons_play(const OnsState& state) {
  const int n = state.dims.assets();
  return (1.0 - state.cfg.mix) * state.x.weights() + Vector::Constant(n, state.cfg.mix / n);
}

LearnerStep ons_step(OnsState& state, const MarketRound& r, const SolverConfig& solver) {
  const Vector played = ons_play(state);
  LossRecord loss = loss_and_gradient(PortfolioState::clipped(played, state.dims), r);
  Matrix covariance = state.covariance + loss.gradient * loss.gradient.transpose();

  const Vector x_t = state.x.weights();
  const Vector g = loss.gradient;
  const double beta = state.cfg.beta;
  const Objective objective{
      .value =
          [=](const Vector& x) {
            const Vector d = x - x_t;
            return d.dot(g) + 0.5 * beta * d.dot(covariance * d);
          },
      .gradient = [=](const Vector& x) -> Vector { return g + beta * (covariance * (x - x_t)); },
      .hessian = [=](const Vector&) -> Matrix { return beta * covariance; },
  };
  SolveResult next = minimize_over_clipped_simplex(objective, state.x, state.dims, solver);
  state.covariance = std::move(covariance);
  state.x = std::move(next.x);
  return LearnerStep{played, std::move(loss)};
}

Vector eg_update(const Vector& x, const Vector& gradient, double eta) {
  // Shift exponents by their maximum so the largest factor is exp(0).
  const Vector exponent = -eta * gradient;
  const double shift = exponent.maxCoeff();
  Vector w = x.array() * (exponent.array() - shift).exp();
  return w / w.sum();
}

Vector project_onto_simplex(const Vector& v) {
  const Eigen::Index n = v.size();
  std::vector<double> sorted(v.data(), v.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    cumsum += sorted[static_cast<std::size_t>(j)];
    const double candidate = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (sorted[static_cast<std::size_t>(j)] - candidate > 0.0) theta = candidate;
  }
  Vector w = (v.array() - theta).cwiseMax(0.0);
  return w / w.sum();
}

Vector ogd_update(const Vector& x, const Vector& gradient, double eta) {
  return project_onto_simplex(x - eta * gradient);
}

Vector soft_bayes_update(const Vector& x, const MarketRound& r, double eta) {
  const double wealth = x.dot(r.relatives());
  Vector next = x.array() * (1.0 - eta + eta * r.relatives().array() / wealth);
  return next / next.sum();
}

double default_eg_rate(const ProblemDims& dims, double g_est) {
  if (!(g_est > 0.0)) throw ValidationError("gradient scale estimate must be positive");
  return std::sqrt(std::log(static_cast<double>(dims.assets())) / dims.horizon()) / g_est;
}

double default_ogd_rate(const ProblemDims& dims) { return 1.0 / std::sqrt(dims.horizon()); }

double default_soft_bayes_rate(const ProblemDims& dims) {
  return std::sqrt(std::log(static_cast<double>(dims.assets())) /
                   (static_cast<double>(dims.assets()) * dims.horizon()));
}

double crp_total_loss(const Vector& u, const std::vector<MarketRound>& rounds) {
  double total = 0.0;
  for (const auto& r : rounds) total += log_loss(u, r);
  return total;
}

CrpSolution best_crp(const std::vector<MarketRound>& rounds, const ProblemDims& dims,
                     const SolverConfig& solver) {
  if (rounds.empty()) throw ValidationError("best CRP needs at least one round");
  const Eigen::Index n = dims.assets();
  auto rel = std::make_shared<Matrix>(static_cast<Eigen::Index>(rounds.size()), n);
  for (std::size_t s = 0; s < rounds.size(); ++s) {
    if (rounds[s].size() != n) throw ValidationError("market round has the wrong asset count");
    rel->row(static_cast<Eigen::Index>(s)) = rounds[s].relatives().transpose();
  }
  const Objective objective{
      .value = [rel](const Vector& u) { return -(*rel * u).array().log().sum(); },
      .gradient = [rel](const Vector& u) -> Vector {
        return -rel->transpose() * (*rel * u).cwiseInverse();
      },
      .hessian = [rel](const Vector& u) -> Matrix {
        const Matrix scaled = (*rel * u).cwiseInverse().asDiagonal() * (*rel);
        return scaled.transpose() * scaled;
      },
  };
  SolveResult best =
      minimize_over_clipped_simplex(objective, PortfolioState::uniform(dims.assets()), dims, solver);
  const double total = crp_total_loss(best.x.weights(), rounds);
  return CrpSolution{std::move(best.x), total};
}

UniversalPortfolioGrid::UniversalPortfolioGrid(int assets, double resolution) {
  if (assets != 2 && assets != 3) {
    throw ValidationError("grid Universal Portfolio supports only N = 2 or N = 3");
  }
  if (!(resolution > 0.0 && resolution <= 0.5)) {
    throw ValidationError("grid resolution must lie in (0, 1/2]");
  }
  const long steps = std::lround(1.0 / resolution);
  const double h = 1.0 / static_cast<double>(steps);
  if (assets == 2) {
    for (long i = 0; i <= steps; ++i) {
      Vector b(2);
      b << i * h, 1.0 - i * h;
      points_.push_back(b);
    }
  } else {
    for (long i = 0; i <= steps; ++i) {
      for (long j = 0; i + j <= steps; ++j) {
        Vector b(3);
        b << i * h, j * h, std::max(0.0, 1.0 - i * h - j * h);
        points_.push_back(b);
      }
    }
  }
  log_wealth_.assign(points_.size(), 0.0);
}

Vector UniversalPortfolioGrid::play() const {
  const double top = *std::max_element(log_wealth_.begin(), log_wealth_.end());
  Vector acc = Vector::Zero(points_.front().size());
  double total = 0.0;
  for (std::size_t k = 0; k < points_.size(); ++k) {
    if (log_wealth_[k] == -std::numeric_limits<double>::infinity()) continue;
    const double w = std::exp(log_wealth_[k] - top);
    acc += w * points_[k];
    total += w;
  }
  return acc / total;
}

void UniversalPortfolioGrid::observe(const MarketRound& r) {
  for (std::size_t k = 0; k < points_.size(); ++k) {
    const double wealth = points_[k].dot(r.relatives());
    log_wealth_[k] += wealth > 0.0 ? std::log(wealth) : -std::numeric_limits<double>::infinity();
  }
}

UniversalPortfolioRun universal_portfolio_grid(const std::vector<MarketRound>& rounds,
                                               const ProblemDims& dims, double resolution) {
  UniversalPortfolioGrid grid(dims.assets(), resolution);
  UniversalPortfolioRun run;
  for (const auto& r : rounds) {
    run.plays.push_back(grid.play());
    run.total_loss += log_loss(run.plays.back(), r);
    grid.observe(r);
  }
  return run;
}

namespace {

class OnsLearner final : public OnlineLearner {
 public:
  OnsLearner(const ProblemDims& dims, const OnsConfig& cfg, const SolverConfig& solver)
      : state_(ons_init(dims, cfg)), solver_(solver) {}
  std::string name() const override { return "ons"; }
  bool clipped() const override { return true; }
  Vector next_play() const override { return ons_play(state_); }
  LearnerStep step(const MarketRound& r) override { return ons_step(state_, r, solver_); }

 private:
  OnsState state_;
  SolverConfig solver_;
};

// Shared driver for the closed-form updates on the full simplex.
class FirstOrderLearner final : public OnlineLearner {
 public:
  using Update = std::function<Vector(const Vector&, const MarketRound&, const LossRecord&)>;
  FirstOrderLearner(std::string name, int assets, Update update)
      : name_(std::move(name)), x_(Vector::Constant(assets, 1.0 / assets)), update_(std::move(update)) {}
  std::string name() const override { return name_; }
  bool clipped() const override { return false; }
  Vector next_play() const override { return x_; }
  LearnerStep step(const MarketRound& r) override {
    LossRecord loss = loss_and_gradient(PortfolioState::simplex(x_), r);
    Vector played = x_;
    x_ = update_(x_, r, loss);
    return LearnerStep{std::move(played), std::move(loss)};
  }

 private:
  std::string name_;
  Vector x_;
  Update update_;
};

class UniversalGridLearner final : public OnlineLearner {
 public:
  UniversalGridLearner(int assets, double resolution) : grid_(assets, resolution) {}
  std::string name() const override { return "up-grid"; }
  bool clipped() const override { return false; }
  Vector next_play() const override { return grid_.play(); }
  LearnerStep step(const MarketRound& r) override {
    Vector played = grid_.play();
    LossRecord loss = loss_and_gradient(PortfolioState::simplex(played), r);
    grid_.observe(r);
    return LearnerStep{std::move(played), std::move(loss)};
  }

 private:
  UniversalPortfolioGrid grid_;
};

void check_rate(double eta) {
  if (!(eta >= 0.0 && std::isfinite(eta))) throw ValidationError("learning rate must be >= 0");
}

}  // namespace

std::unique_ptr<OnlineLearner> make_ons_learner(const ProblemDims& dims, const OnsConfig& cfg,
                                                const SolverConfig& solver) {
  return std::make_unique<OnsLearner>(dims, cfg, solver);
}

std::unique_ptr<OnlineLearner> make_eg_learner(const ProblemDims& dims, double eta) {
  check_rate(eta);
  return std::make_unique<FirstOrderLearner>(
      "eg", dims.assets(),
      [eta](const Vector& x, const MarketRound&, const LossRecord& loss) {
        return eg_update(x, loss.gradient, eta);
      });
}

std::unique_ptr<OnlineLearner> make_ogd_learner(const ProblemDims& dims, double eta) {
  check_rate(eta);
  return std::make_unique<FirstOrderLearner>(
      "ogd", dims.assets(),
      [eta](const Vector& x, const MarketRound&, const LossRecord& loss) {
        return ogd_update(x, loss.gradient, eta);
      });
}

std::unique_ptr<OnlineLearner> make_soft_bayes_learner(const ProblemDims& dims, double eta) {
  check_rate(eta);
  if (eta > 1.0) throw ValidationError("Soft-Bayes rate must not exceed 1");
  return std::make_unique<FirstOrderLearner>(
      "softbayes", dims.assets(),
      [eta](const Vector& x, const MarketRound& r, const LossRecord&) {
        return soft_bayes_update(x, r, eta);
      });
}

std::unique_ptr<OnlineLearner> make_universal_grid_learner(const ProblemDims& dims,
                                                           double resolution) {
  return std::make_unique<UniversalGridLearner>(dims.assets(), resolution);
}

}  // namespace barrons
