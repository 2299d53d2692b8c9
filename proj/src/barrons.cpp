#include "barrons/barrons.hpp"

#include <cmath>

namespace barrons {

namespace {

// h(x/y) = x/y - 1 - ln(x/y), evaluated through d = (x - y)/y to avoid
// cancellation when x is close to y.
double barrier_gap(double x, double y) {
  const double d = (x - y) / y;
  return d - std::log1p(d);
}

}  // namespace

double log_base(double value, int horizon) { return std::log(value) / std::log(horizon); }

BarronsState barrons_init(const ProblemDims& dims, double beta, double eta_base) {
  if (!(beta > 0.0 && beta <= 0.5)) {
    throw ValidationError("beta must lie in (0, 1/2], got " + std::to_string(beta));
  }
  if (!(eta_base > 0.0 && eta_base <= 1.0)) {
    throw ValidationError("eta must lie in (0, 1], got " + std::to_string(eta_base));
  }
  const int n = dims.assets();
  return BarronsState{
      .dims = dims,
      .round = 1,
      .x = PortfolioState::uniform(n),
      .covariance = n * Matrix::Identity(n, n),
      .log_max = Vector::Zero(n),
      .learning_rates = Vector::Constant(n, eta_base),
      .beta = beta,
      .eta_base = eta_base,
      .history = {},
  };
}

double bregman_divergence(const Vector& x, const Vector& y, const Matrix& covariance, double beta,
                          const Vector& learning_rates) {
  const Vector d = x - y;
  double value = 0.5 * beta * d.dot(covariance * d);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    value += barrier_gap(x[i], y[i]) / learning_rates[i];
  }
  return value;
}

Objective omd_step_objective(const Vector& x_t, const Vector& gradient, const Matrix& covariance,
                             double beta, const Vector& learning_rates) {
  // Captured by value: the objective outlives the caller's temporaries.
  return Objective{
      .value =
          [=](const Vector& x) {
            return (x - x_t).dot(gradient) +
                   bregman_divergence(x, x_t, covariance, beta, learning_rates);
          },
      .gradient =
          [=](const Vector& x) {
            Vector g = gradient + beta * (covariance * (x - x_t));
            g.array() += (1.0 / x_t.array() - 1.0 / x.array()) / learning_rates.array();
            return g;
          },
      .hessian =
          [=](const Vector& x) {
            Matrix h = beta * covariance;
            h.diagonal().array() += 1.0 / (learning_rates.array() * x.array().square());
            return h;
          },
  };
}

BarronsStepResult barrons_step(BarronsState& state, const MarketRound& r,
                               const SolverConfig& solver) {
  const int n = state.dims.assets();
  if (r.size() != n) {
    throw ValidationError("market round has the wrong number of assets");
  }
  LossRecord loss = loss_and_gradient(state.x, r);
  const Vector& g = loss.gradient;

  Matrix covariance = state.covariance + g * g.transpose();
  Vector log_max = state.log_max;
  const int horizon = state.dims.horizon();
  for (int i = 0; i < n; ++i) {
    log_max[i] = std::max(log_max[i], log_base(1.0 / (n * state.x[i]), horizon));
  }
  Vector learning_rates = state.eta_base * log_max.array().exp();

  const Objective objective =
      omd_step_objective(state.x.weights(), g, covariance, state.beta, learning_rates);
  SolveResult next = minimize_over_clipped_simplex(objective, state.x, state.dims, solver);

  state.history.push_back({state.x.weights(), g});
  state.covariance = std::move(covariance);
  state.log_max = std::move(log_max);
  state.learning_rates = std::move(learning_rates);
  state.x = std::move(next.x);
  ++state.round;
  return BarronsStepResult{std::move(loss), next.stats};
}

}  // namespace barrons
