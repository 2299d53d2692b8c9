#include "barrons/ada_barrons.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace barrons {

AdaConfig AdaConfig::defaults(const ProblemDims& dims) {
  const double log_t = std::log(static_cast<double>(dims.horizon()));
  return AdaConfig{
      .beta_init = 0.5,
      .eta_base = 1.0 / (2048.0 * dims.assets() * log_t * log_t),
      .gamma = 1.0 / 25.0,
  };
}

void AdaConfig::validate() const {
  if (!(beta_init > 0.0 && beta_init <= 0.5)) {
    throw ValidationError("beta must lie in (0, 1/2], got " + std::to_string(beta_init));
  }
  if (!(eta_base > 0.0 && eta_base <= 1.0 / 300.0)) {
    throw ValidationError("eta must lie in (0, 1/300], got " + std::to_string(eta_base));
  }
  if (!(gamma > 0.0 && gamma <= 1.0 / 25.0)) {
    throw ValidationError("gamma must lie in (0, 1/25], got " + std::to_string(gamma));
  }
}

int max_epoch_count(const ProblemDims& dims) {
  const double nt = static_cast<double>(dims.assets()) * dims.horizon();
  return static_cast<int>(std::ceil(std::log2(32.0 * nt))) + 1;
}

double iterate_stability_bound(double eta_base) { return std::sqrt(3.0 * eta_base) / 2.0; }

double leader_stability_bound(double gamma) { return std::sqrt(gamma) / 2.0; }

AdaState ada_init(const ProblemDims& dims, const AdaConfig& cfg) {
  cfg.validate();
  return AdaState{
      .cfg = cfg,
      .inner = barrons_init(dims, cfg.beta_init, cfg.eta_base),
      .epoch_index = 1,
      .global_round = 1,
      .epoch_rounds = {},
      .leader = std::nullopt,
      .prev_alpha = std::nullopt,
      .prev_ratio_max = std::nullopt,
  };
}

Objective regularized_leader_objective(const std::vector<MarketRound>& epoch_rounds,
                                       double gamma) {
  if (epoch_rounds.empty()) {
    throw ValidationError("regularized leader needs at least one round");
  }
  const Eigen::Index n = epoch_rounds.front().size();
  auto rel = std::make_shared<Matrix>(static_cast<Eigen::Index>(epoch_rounds.size()), n);
  for (std::size_t s = 0; s < epoch_rounds.size(); ++s) {
    if (epoch_rounds[s].size() != n) {
      throw ValidationError("market rounds differ in asset count");
    }
    rel->row(static_cast<Eigen::Index>(s)) = epoch_rounds[s].relatives().transpose();
  }
  const double inv_gamma = 1.0 / gamma;
  return Objective{
      .value =
          [rel, inv_gamma](const Vector& u) {
            return -(*rel * u).array().log().sum() - inv_gamma * u.array().log().sum();
          },
      .gradient =
          [rel, inv_gamma](const Vector& u) {
            const Vector inv_wealth = (*rel * u).cwiseInverse();
            Vector g = -rel->transpose() * inv_wealth;
            g.array() -= inv_gamma / u.array();
            return g;
          },
      .hessian =
          [rel, inv_gamma](const Vector& u) {
            const Vector inv_wealth = (*rel * u).cwiseInverse();
            const Matrix scaled = inv_wealth.asDiagonal() * (*rel);
            Matrix h = scaled.transpose() * scaled;
            h.diagonal().array() += inv_gamma / u.array().square();
            return h;
          },
  };
}

SolveResult regularized_leader(const std::vector<MarketRound>& epoch_rounds, double gamma,
                               const PortfolioState& warm_start, const ProblemDims& dims,
                               const SolverConfig& solver) {
  if (!(gamma > 0.0)) {
    throw ValidationError("gamma must be positive");
  }
  return minimize_over_clipped_simplex(regularized_leader_objective(epoch_rounds, gamma),
                                       warm_start, dims, solver);
}

double alpha(const Vector& u, const std::vector<PlayedRound>& history) {
  double worst = 0.0;
  for (const auto& played : history) {
    worst = std::max(worst, std::abs((u - played.x).dot(played.gradient)));
  }
  if (worst == 0.0) return 0.5;
  return std::min(0.5, 1.0 / (8.0 * worst));
}

double ratio_max(const Vector& u, const std::vector<PlayedRound>& history) {
  double best = 0.0;
  for (const auto& played : history) {
    best = std::max(best, (u.array() / played.x.array()).maxCoeff());
  }
  return best;
}

namespace {

double max_ratio_deviation(const Vector& next, const Vector& prev) {
  return ((next.array() / prev.array()) - 1.0).abs().maxCoeff();
}

std::string describe(int round, const std::string& what) {
  return "round " + std::to_string(round) + ": " + what;
}

}  // namespace

AdaStepResult ada_step(AdaState& state, const MarketRound& r, const SolverConfig& solver) {
  const ProblemDims dims = state.inner.dims;
  AdaStepResult out;
  out.global_round = state.global_round;
  out.epoch_index = state.epoch_index;
  out.epoch_round = state.inner.round;
  out.beta = state.inner.beta;
  out.played = state.inner.x.weights();

  const auto step = barrons_step(state.inner, r, solver);
  out.loss = step.loss;
  out.learning_rates = state.inner.learning_rates;

  const PortfolioState warm = state.leader ? *state.leader : PortfolioState::uniform(dims.assets());
  state.epoch_rounds.push_back(r);
  SolveResult leader = regularized_leader(state.epoch_rounds, state.cfg.gamma, warm, dims, solver);
  out.leader = leader.x.weights();
  out.alpha = alpha(out.leader, state.inner.history);
  out.ratio_max = ratio_max(out.leader, state.inner.history);

  auto flag = [&](const std::string& what) { out.violations.push_back(describe(out.global_round, what)); };
  std::ostringstream os;
  os.precision(17);

  const double eta = state.cfg.eta_base;
  const Vector& rates = out.learning_rates;
  if (rates.minCoeff() < eta * (1.0 - 1e-12) || rates.maxCoeff() > std::exp(1.0) * eta * (1.0 + 1e-12)) {
    flag("learning rates left the band [eta, e*eta]");
  }
  const double alpha_floor = 1.0 / (16.0 * dims.assets() * dims.horizon());
  if (out.alpha < alpha_floor || out.alpha > 0.5) {
    os.str("");
    os << "alpha " << out.alpha << " outside [1/(16NT), 1/2]";
    flag(os.str());
  }
  if (state.leader) {
    out.leader_ratio_dev = max_ratio_deviation(out.leader, state.leader->weights());
    if (*out.leader_ratio_dev > leader_stability_bound(state.cfg.gamma) + kStabilitySlack) {
      os.str("");
      os << "leader moved by ratio " << *out.leader_ratio_dev;
      flag(os.str());
    }
  }

  out.restart = out.beta > out.alpha;
  if (out.restart) {
    if (state.prev_ratio_max && *state.prev_ratio_max < 0.5 * out.ratio_max) {
      os.str("");
      os << "ratio max dropped by more than half at restart: a_{t-1} = " << *state.prev_ratio_max
         << ", a_t = " << out.ratio_max;
      flag(os.str());
    }
    if (state.prev_alpha && out.beta > *state.prev_alpha) {
      flag("restart fired although beta exceeded alpha at the previous round");
    }
    ++state.epoch_index;
    if (state.epoch_index > max_epoch_count(dims)) {
      throw InvariantViolation(describe(out.global_round, "epoch count " +
                                                              std::to_string(state.epoch_index) +
                                                              " exceeds the bound " +
                                                              std::to_string(max_epoch_count(dims))));
    }
    state.inner = barrons_init(dims, 0.5 * out.beta, eta);
    state.epoch_rounds.clear();
    state.leader.reset();
    state.prev_alpha.reset();
    state.prev_ratio_max.reset();
  } else {
    out.iterate_ratio_dev = max_ratio_deviation(state.inner.x.weights(), out.played);
    if (*out.iterate_ratio_dev > iterate_stability_bound(eta) + kStabilitySlack) {
      os.str("");
      os << "iterate moved by ratio " << *out.iterate_ratio_dev;
      flag(os.str());
    }
    state.leader = std::move(leader.x);
    state.prev_alpha = out.alpha;
    state.prev_ratio_max = out.ratio_max;
  }
  ++state.global_round;
  return out;
}

}  // namespace barrons
