#include "barrons/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace barrons {

namespace {

constexpr double kValueTol = 1e-9;
constexpr double kWealthRatioTol = 1e-6;

bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double max_ratio_deviation(const Vector& next, const Vector& prev) {
  return ((next.array() / prev.array()) - 1.0).abs().maxCoeff();
}

class Checker {
 public:
  explicit Checker(VerifyReport& report) : report_(report) {}
  void fail(int round, std::string message) { report_.issues.push_back({round, std::move(message)}); }

 private:
  VerifyReport& report_;
};

}  // namespace

VerifyReport verify_trace(const ExperimentResult& trace) {
  VerifyReport report;
  Checker check(report);

  if (trace.market.empty()) {
    check.fail(0, "trace has no market data");
    return report;
  }
  if (static_cast<int>(trace.market.size()) != trace.horizon) {
    check.fail(0, "market length " + std::to_string(trace.market.size()) +
                      " does not match horizon " + std::to_string(trace.horizon));
    return report;
  }
  if (trace.rounds.size() > trace.market.size()) {
    check.fail(0, "more rounds than market periods");
    return report;
  }
  std::optional<ProblemDims> maybe_dims;
  try {
    maybe_dims.emplace(trace.assets, trace.horizon);
  } catch (const ValidationError& e) {
    check.fail(0, e.what());
    return report;
  }
  const ProblemDims dims = *maybe_dims;
  const int n = dims.assets();
  const auto& p = trace.learner;
  const bool clipped = p.clipped();
  const bool adaptive = p.kind == LearnerKind::Ada;
  const bool single_epoch = p.kind == LearnerKind::Barrons;
  const bool stability_applies = (adaptive || single_epoch) && p.eta <= 1.0 / 300.0;

  if (!trace.summary.completed) {
    report.notes.push_back("run stopped early (" + trace.summary.error_kind +
                           "): " + trace.summary.error);
  } else if (trace.rounds.size() != trace.market.size()) {
    check.fail(0, "completed run is missing rounds");
  }

  double cumulative = 0.0;
  double max_grad = 0.0;
  int restarts = 0;
  int max_epoch = 1;

  // Per-epoch state for the adaptive checks.
  double expected_beta = p.beta;
  int expected_epoch = 1;
  int expected_epoch_round = 1;
  std::vector<PlayedRound> history;
  std::optional<Vector> prev_leader;
  std::optional<Vector> prev_x;
  double prev_ratio_max = HUGE_VAL;  // a_{t-1}; infinite on an epoch's first round
  const double alpha_floor = 1.0 / (16.0 * n * dims.horizon());

  for (std::size_t k = 0; k < trace.rounds.size(); ++k) {
    const RoundRecord& rec = trace.rounds[k];
    const int t = static_cast<int>(k) + 1;
    const Vector& r = trace.market[k].relatives();
    ++report.rounds_checked;

    if (rec.global_round != t) {
      check.fail(t, "global_round is " + std::to_string(rec.global_round));
    }
    if (rec.x.size() != n) {
      check.fail(t, "played point has " + std::to_string(rec.x.size()) + " coordinates");
      break;
    }
    const std::string membership =
        clipped ? clipped_membership_error(rec.x, dims) : simplex_membership_error(rec.x);
    if (!membership.empty()) check.fail(t, "played point " + membership);

    const double wealth = rec.x.dot(r);
    if (!(wealth > 0.0)) {
      check.fail(t, "played point has zero wealth");
      break;
    }
    const double loss = -std::log(wealth);
    const Vector gradient = -r / wealth;
    const double grad_norm = gradient.lpNorm<Eigen::Infinity>();
    cumulative += loss;
    max_grad = std::max(max_grad, grad_norm);

    if (!close(rec.loss, loss, kValueTol)) {
      check.fail(t, "loss " + num(rec.loss) + " but -ln<x, r> = " + num(loss));
    }
    if (!close(rec.cumulative_loss, cumulative, kValueTol)) {
      check.fail(t, "cumulative_loss " + num(rec.cumulative_loss) + " but prefix sum is " +
                        num(cumulative));
    }
    if (!close(rec.grad_inf_norm, grad_norm, kValueTol)) {
      check.fail(t, "grad_inf_norm " + num(rec.grad_inf_norm) + " but recomputed " + num(grad_norm));
    }
    if (clipped && grad_norm > static_cast<double>(n) * dims.horizon() * (1.0 + 1e-12)) {
      check.fail(t, "gradient sup-norm exceeds NT");
    }
    if (rec.restart) ++restarts;
    max_epoch = std::max(max_epoch, rec.epoch_index);

    if (!adaptive && !single_epoch) {
      if (rec.restart || rec.epoch_index != 1) check.fail(t, "baseline learner reports an epoch change");
      continue;
    }

    if (!rec.beta) {
      check.fail(t, "beta missing");
    } else if (*rec.beta != expected_beta) {
      check.fail(t, "beta " + num(*rec.beta) + " but expected " + num(expected_beta));
    }
    if (rec.epoch_index != expected_epoch) {
      check.fail(t, "epoch_index " + std::to_string(rec.epoch_index) + " but expected " +
                        std::to_string(expected_epoch));
    }
    if (rec.epoch_round != expected_epoch_round) {
      check.fail(t, "epoch_round " + std::to_string(rec.epoch_round) + " but expected " +
                        std::to_string(expected_epoch_round));
    }
    if (expected_epoch_round == 1 &&
        (rec.x.array() - 1.0 / n).abs().maxCoeff() > 1e-12) {
      check.fail(t, "first round of an epoch does not play uniform");
    }
    if (prev_x && stability_applies) {
      const double dev = max_ratio_deviation(rec.x, *prev_x);
      if (dev > iterate_stability_bound(p.eta) + kStabilitySlack) {
        check.fail(t, "iterate moved by ratio " + num(dev) + " within an epoch");
      }
    }
    prev_x = rec.x;
    history.push_back({rec.x, gradient});
    ++expected_epoch_round;

    if (single_epoch) {
      if (rec.restart) check.fail(t, "fixed-beta learner reports a restart");
      continue;
    }

    // Adaptive learner: leader, alpha and the restart rule.
    if (!rec.leader || rec.leader->size() != n) {
      check.fail(t, "leader missing");
      break;
    }
    const Vector& u = *rec.leader;
    if (const auto err = clipped_membership_error(u, dims); !err.empty()) {
      check.fail(t, "leader " + err);
    }
    const double a = alpha(u, history);
    if (!rec.alpha || !close(*rec.alpha, a, kValueTol)) {
      check.fail(t, "alpha " + (rec.alpha ? num(*rec.alpha) : std::string("missing")) +
                        " but recomputed " + num(a));
    }
    if (a < alpha_floor || a > 0.5) {
      check.fail(t, "alpha " + num(a) + " outside [1/(16NT), 1/2]");
    }
    if (prev_leader) {
      const double dev = max_ratio_deviation(u, *prev_leader);
      if (dev > leader_stability_bound(p.gamma) + kStabilitySlack) {
        check.fail(t, "leader moved by ratio " + num(dev) + " within an epoch");
      }
    }
    const double a_max = ratio_max(u, history);

    const bool should_restart = expected_beta > a;
    if (rec.restart != should_restart && !close(expected_beta, a, kValueTol)) {
      check.fail(t, std::string(rec.restart ? "restart flagged although" : "no restart although") +
                        " beta = " + num(expected_beta) + " and alpha = " + num(a));
    }

    if (rec.restart) {
      ++report.restarts_checked;
      if (prev_ratio_max < 0.5 * a_max) {
        check.fail(t, "ratio max dropped by more than half at restart: a_{t-1} = " +
                          num(prev_ratio_max) + ", a_t = " + num(a_max));
      }
      expected_beta *= 0.5;
      ++expected_epoch;
      expected_epoch_round = 1;
      history.clear();
      prev_leader.reset();
      prev_x.reset();
      prev_ratio_max = HUGE_VAL;
      if (expected_epoch > max_epoch_count(dims)) {
        check.fail(t, "epoch count " + std::to_string(expected_epoch) + " exceeds the bound " +
                          std::to_string(max_epoch_count(dims)));
      }
    } else {
      prev_leader = u;
      prev_ratio_max = a_max;
    }
  }

  const auto& s = trace.summary;
  if (!trace.rounds.empty() && !close(s.total_loss, cumulative, kValueTol)) {
    check.fail(0, "total_loss " + num(s.total_loss) + " but sum of losses is " + num(cumulative));
  }
  if (!trace.rounds.empty()) {
    const std::vector<MarketRound> played(
        trace.market.begin(),
        trace.market.begin() + static_cast<std::ptrdiff_t>(trace.rounds.size()));
    if (s.best_crp.size() != n) {
      check.fail(0, "best CRP has the wrong dimension");
    } else {
      if (const auto err = clipped_membership_error(s.best_crp, dims); !err.empty()) {
        check.fail(0, "best CRP " + err);
      }
      const double crp_loss = crp_total_loss(s.best_crp, played);
      if (!close(s.best_crp_loss, crp_loss, kValueTol)) {
        check.fail(0, "best_crp_loss " + num(s.best_crp_loss) + " but the CRP loses " +
                          num(crp_loss));
      }
    }
    if (!close(s.regret, s.total_loss - s.best_crp_loss, kValueTol)) {
      check.fail(0, "regret is not total_loss - best_crp_loss");
    }
    if (!close(s.wealth_ratio_regret, s.regret, kWealthRatioTol)) {
      check.fail(0, "multiplicative regret " + num(s.wealth_ratio_regret) +
                        " disagrees with additive regret " + num(s.regret));
    }
  }
  if (!close(s.max_grad_inf_norm, max_grad, kValueTol)) {
    check.fail(0, "max_grad_inf_norm " + num(s.max_grad_inf_norm) + " but recomputed " +
                      num(max_grad));
  }
  if (s.epoch_count != max_epoch) {
    check.fail(0, "epoch_count " + std::to_string(s.epoch_count) + " but rounds reach epoch " +
                      std::to_string(max_epoch));
  }
  if (s.restarts != restarts) {
    check.fail(0, "restarts " + std::to_string(s.restarts) + " but " + std::to_string(restarts) +
                      " rounds are flagged");
  }
  if (adaptive && s.epoch_count > max_epoch_count(dims)) {
    check.fail(0, "epoch_count exceeds the bound " + std::to_string(max_epoch_count(dims)));
  }
  for (const auto& v : s.invariant_violations) check.fail(0, "recorded violation: " + v);
  return report;
}

}  // namespace barrons
