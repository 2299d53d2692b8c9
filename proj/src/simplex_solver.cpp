#include "barrons/simplex_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>

namespace barrons {

void SolverConfig::validate() const {
  if (!(kkt_tol > 0.0)) throw ValidationError("kkt_tol must be positive");
  if (max_newton_iters <= 0) throw ValidationError("max_newton_iters must be positive");
  if (!(barrier_mu_init > 0.0)) throw ValidationError("barrier_mu_init must be positive");
  if (!(barrier_shrink > 0.0 && barrier_shrink < 1.0)) {
    throw ValidationError("barrier_shrink must lie in (0, 1)");
  }
  if (!(min_barrier_mu > 0.0)) throw ValidationError("min_barrier_mu must be positive");
  if (min_barrier_mu > barrier_mu_init) {
    throw ValidationError("min_barrier_mu must not exceed barrier_mu_init");
  }
}

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kBacktrack = 0.5;
constexpr double kFractionToBoundary = 0.99;
constexpr double kMinStep = 1e-20;
constexpr int kWarmStartSteps = 3;

// Works in slack coordinates z = x - floor, so the active face sits at z = 0
// and tiny slacks keep full relative precision.
class BarrierProblem {
 public:
  BarrierProblem(const Objective& obj, double floor, int n) : obj_(obj), floor_(floor), x_(n) {}

  double merit(const Vector& z, double mu) {
    x_ = z.array() + floor_;
    double barrier = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) barrier -= std::log(z[i]);
    return obj_.value(x_) + mu * barrier;
  }

  struct Newton {
    Vector dz;
    Vector grad;
    double decrement_sq = 0.0;
  };

  // Equality-constrained Newton direction. The constraint sum(dz) = 0 is
  // eliminated through the coordinate with the largest slack, which is never
  // near its bound, so huge barrier curvature stays on the diagonal.
  Newton direction(const Vector& z, double mu) {
    const Eigen::Index n = z.size();
    x_ = z.array() + floor_;
    Vector g = obj_.gradient(x_);
    Matrix h = obj_.hessian(x_);
    g.array() -= mu / z.array();
    h.diagonal().array() += mu / z.array().square();

    Eigen::Index pivot = 0;
    z.maxCoeff(&pivot);

    const Eigen::Index m = n - 1;
    Matrix hr(m, m);
    Vector gr(m);
    auto full = [pivot](Eigen::Index a) { return a < pivot ? a : a + 1; };
    for (Eigen::Index a = 0; a < m; ++a) {
      const Eigen::Index ia = full(a);
      gr[a] = g[ia] - g[pivot];
      for (Eigen::Index b = 0; b < m; ++b) {
        const Eigen::Index ib = full(b);
        hr(a, b) = h(ia, ib) - h(ia, pivot) - h(pivot, ib) + h(pivot, pivot);
      }
    }
    Eigen::LDLT<Matrix> ldlt(hr);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw SolverFailure("reduced Hessian is not positive definite", x_,
                          std::numeric_limits<double>::infinity());
    }
    const Vector p = ldlt.solve(-gr);

    Newton out;
    out.dz = Vector::Zero(n);
    for (Eigen::Index a = 0; a < m; ++a) out.dz[full(a)] = p[a];
    out.dz[pivot] = -p.sum();
    out.decrement_sq = std::max(0.0, -gr.dot(p));
    out.grad = std::move(g);
    return out;
  }

  double lagrangian_grad_norm(const Vector& z, double mu) {
    x_ = z.array() + floor_;
    Vector g = obj_.gradient(x_);
    g.array() -= mu / z.array();
    const double nu = -g.mean();
    return (g.array() + nu).matrix().norm();
  }

  Vector to_x(const Vector& z) const { return (z.array() + floor_).matrix(); }

 private:
  const Objective& obj_;
  double floor_;
  Vector x_;
};

struct StageOutcome {
  bool converged = false;
  int steps = 0;
  double decrement_sq = 0.0;
};

// Runs damped Newton at a fixed barrier weight. Stops at the tolerance, at
// the rounding floor of the merit function, or after `max_steps` steps.
StageOutcome center(BarrierProblem& problem, Vector& z, double mu, double tol, int max_steps,
                    int stage, const IterationObserver& observer) {
  StageOutcome out;
  double phi = problem.merit(z, mu);
  for (;;) {
    auto nt = problem.direction(z, mu);
    out.decrement_sq = nt.decrement_sq;
    const double rounding_floor =
        1e3 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(phi));
    if (out.steps == 0 && observer) observer({stage, mu, phi, nt.decrement_sq, 0.0});
    if (nt.decrement_sq <= tol) {
      out.converged = true;
      return out;
    }
    if (out.steps >= max_steps) return out;

    double max_step = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      if (nt.dz[i] < 0.0) max_step = std::min(max_step, -z[i] / nt.dz[i]);
    }
    double step = std::min(1.0, kFractionToBoundary * max_step);
    const double slope = nt.grad.dot(nt.dz);
    bool accepted = false;
    Vector trial(z.size());
    while (step >= kMinStep) {
      trial = z + step * nt.dz;
      if ((trial.array() > 0.0).all()) {
        const double phi_trial = problem.merit(trial, mu);
        if (std::isfinite(phi_trial) && phi_trial <= phi + kArmijo * step * slope) {
          accepted = true;
          z = trial;
          phi = phi_trial;
          break;
        }
      }
      step *= kBacktrack;
    }
    if (!accepted) {
      if (nt.decrement_sq <= rounding_floor) {
        // No representable descent is left; the iterate is optimal to
        // working precision.
        out.converged = true;
        return out;
      }
      std::ostringstream os;
      os << "line search failed at barrier weight " << mu << " (squared decrement "
         << nt.decrement_sq << ")";
      throw SolverFailure(os.str(), problem.to_x(z), nt.decrement_sq);
    }
    ++out.steps;
    if (observer) observer({stage, mu, phi, nt.decrement_sq, step});
  }
}

}  // namespace

SolveResult minimize_over_clipped_simplex(const Objective& obj, const PortfolioState& warm_start,
                                          const ProblemDims& dims, const SolverConfig& cfg,
                                          const IterationObserver& observer) {
  cfg.validate();
  const int n = dims.assets();
  if (warm_start.size() != n) {
    throw ValidationError("warm start has the wrong number of assets");
  }
  if (!warm_start.in_clipped_simplex(dims)) {
    throw ValidationError("warm start is not in the clipped simplex");
  }
  const double lb = dims.floor();
  const double slack_total = 1.0 - n * lb;

  Vector z0 = (warm_start.weights().array() - lb).matrix();
  if ((z0.array() <= 0.0).any()) {
    // Points on the face are legal warm starts but not interior; pull them
    // inward by a negligible amount.
    const double theta = 1e-12;
    z0 = (1.0 - theta) * z0.cwiseMax(0.0) + Vector::Constant(n, theta * slack_total / n);
  }
  z0 *= slack_total / z0.sum();

  BarrierProblem problem(obj, lb, n);
  SolveStats stats;

  auto finish = [&](const Vector& z, double mu, double dec2) {
    stats.final_mu = mu;
    stats.decrement_sq = dec2;
    stats.lagrangian_grad_norm = problem.lagrangian_grad_norm(z, mu);
    Vector x = problem.to_x(z);
    // Slack coordinates sum to 1 - N*floor up to rounding; absorb the drift
    // in the largest coordinate.
    Eigen::Index big = 0;
    x.maxCoeff(&big);
    x[big] += 1.0 - x.sum();
    return SolveResult{PortfolioState::clipped(std::move(x), dims), stats};
  };

  {
    Vector z = z0;
    const auto polish =
        center(problem, z, cfg.min_barrier_mu, cfg.kkt_tol,
                           std::min(kWarmStartSteps, cfg.max_newton_iters), 0, observer);
    if (polish.converged) {
      stats.newton_steps = polish.steps;
      stats.barrier_stages = 1;
      stats.warm_start_accepted = true;
      return finish(z, cfg.min_barrier_mu, polish.decrement_sq);
    }
    stats.newton_steps += polish.steps;
  }

  Vector z = z0;
  double mu = cfg.barrier_mu_init;
  for (int stage = 1;; ++stage) {
    const auto out = center(problem, z, mu, cfg.kkt_tol, cfg.max_newton_iters, stage, observer);
    stats.newton_steps += out.steps;
    stats.barrier_stages = stage;
    if (!out.converged) {
      std::ostringstream os;
      os << "Newton iteration limit " << cfg.max_newton_iters << " reached at barrier weight "
         << mu << " (squared decrement " << out.decrement_sq << ")";
      throw SolverFailure(os.str(), problem.to_x(z), out.decrement_sq);
    }
    if (mu <= cfg.min_barrier_mu) return finish(z, mu, out.decrement_sq);
    mu = std::max(mu * cfg.barrier_shrink, cfg.min_barrier_mu);
  }
}

namespace {

// Index of the minimum of a discretely convex sequence f(0..count-1),
// found by bisection on the sign of forward differences.
template <typename F>
long convex_argmin(long count, F&& f) {
  long lo = 0;
  long hi = count - 1;
  while (lo < hi) {
    const long mid = lo + (hi - lo) / 2;
    if (f(mid + 1) >= f(mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

}  // namespace

PortfolioState grid_search_oracle(const Objective& obj, const ProblemDims& dims,
                                  double resolution) {
  const int n = dims.assets();
  if (n != 2 && n != 3) {
    throw ValidationError("grid search oracle supports only N = 2 or N = 3, got N = " +
                          std::to_string(n));
  }
  if (!(resolution > 0.0)) {
    throw ValidationError("grid resolution must be positive");
  }
  const double lb = dims.floor();
  Vector x(n);
  Vector best(n);
  double best_value = std::numeric_limits<double>::infinity();

  auto consider = [&](const Vector& candidate, double value) {
    if (value < best_value) {
      best_value = value;
      best = candidate;
    }
  };

  // Grid values for one free coordinate in [lb, upper]: lb + k*h for every k
  // that fits, followed by `upper` itself.
  auto line_count = [&](double upper) {
    return static_cast<long>(std::floor((upper - lb) / resolution + 1e-9)) + 2;
  };
  auto line_value = [&](long k, long count, double upper) {
    return k == count - 1 ? upper : lb + static_cast<double>(k) * resolution;
  };

  if (n == 2) {
    const double upper = 1.0 - lb;
    const long count = line_count(upper);
    for (long k = 0; k < count; ++k) {
      x[0] = line_value(k, count, upper);
      x[1] = 1.0 - x[0];
      consider(x, obj.value(x));
    }
  } else {
    const double upper0 = 1.0 - 2.0 * lb;
    const long count0 = line_count(upper0);
    for (long k = 0; k < count0; ++k) {
      const double x0 = line_value(k, count0, upper0);
      const double upper1 = 1.0 - x0 - lb;
      const long count1 = line_count(upper1);
      auto eval = [&](long j) {
        x[0] = x0;
        x[1] = line_value(j, count1, upper1);
        x[2] = 1.0 - x[0] - x[1];
        return obj.value(x);
      };
      const long j = convex_argmin(count1, eval);
      const double value = eval(j);
      consider(x, value);
    }
  }
  return PortfolioState::clipped(best.cwiseMax(lb), dims);
}

}  // namespace barrons
