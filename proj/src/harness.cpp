#include "barrons/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

namespace barrons {

std::string to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::Ada: return "ada";
    case LearnerKind::Barrons: return "barrons";
    case LearnerKind::Ons: return "ons";
    case LearnerKind::Eg: return "eg";
    case LearnerKind::Ogd: return "ogd";
    case LearnerKind::SoftBayes: return "softbayes";
    case LearnerKind::UpGrid: return "up-grid";
  }
  return "unknown";
}

LearnerKind parse_learner_kind(const std::string& name) {
  for (auto kind : {LearnerKind::Ada, LearnerKind::Barrons, LearnerKind::Ons, LearnerKind::Eg,
                    LearnerKind::Ogd, LearnerKind::SoftBayes, LearnerKind::UpGrid}) {
    if (to_string(kind) == name) return kind;
  }
  throw ValidationError("unknown learner '" + name + "'");
}

bool ResolvedLearner::clipped() const {
  return kind == LearnerKind::Ada || kind == LearnerKind::Barrons || kind == LearnerKind::Ons;
}

ResolvedLearner resolve(const LearnerConfig& cfg, const ProblemDims& dims) {
  ResolvedLearner out;
  out.kind = cfg.kind;
  const AdaConfig ada = AdaConfig::defaults(dims);
  switch (cfg.kind) {
    case LearnerKind::Ada:
    case LearnerKind::Barrons:
      out.beta = cfg.beta.value_or(ada.beta_init);
      out.eta = cfg.eta.value_or(ada.eta_base);
      out.gamma = cfg.gamma.value_or(ada.gamma);
      break;
    case LearnerKind::Ons:
      out.beta = cfg.beta.value_or(0.5);
      out.mix = cfg.mix;
      break;
    case LearnerKind::Eg: out.eta = cfg.eta.value_or(default_eg_rate(dims)); break;
    case LearnerKind::Ogd: out.eta = cfg.eta.value_or(default_ogd_rate(dims)); break;
    case LearnerKind::SoftBayes: out.eta = cfg.eta.value_or(default_soft_bayes_rate(dims)); break;
    case LearnerKind::UpGrid: out.up_resolution = cfg.up_resolution; break;
  }
  return out;
}

namespace {

struct RoundOutcome {
  RoundRecord record;
  LossRecord loss;
  std::vector<std::string> violations;
};

class Runner {
 public:
  virtual ~Runner() = default;
  virtual RoundOutcome step(const MarketRound& r) = 0;
};

class AdaRunner final : public Runner {
 public:
  AdaRunner(const ProblemDims& dims, const ResolvedLearner& p, const SolverConfig& solver)
      : state_(ada_init(dims, AdaConfig{p.beta, p.eta, p.gamma})), solver_(solver) {}

  RoundOutcome step(const MarketRound& r) override {
    AdaStepResult s = ada_step(state_, r, solver_);
    RoundOutcome out;
    out.record.global_round = s.global_round;
    out.record.epoch_index = s.epoch_index;
    out.record.epoch_round = s.epoch_round;
    out.record.beta = s.beta;
    out.record.x = s.played;
    out.record.restart = s.restart;
    out.record.alpha = s.alpha;
    out.record.leader = s.leader;
    out.record.ratio_max = s.ratio_max;
    out.record.iterate_ratio_dev = s.iterate_ratio_dev;
    out.record.leader_ratio_dev = s.leader_ratio_dev;
    out.loss = std::move(s.loss);
    out.violations = std::move(s.violations);
    return out;
  }

 private:
  AdaState state_;
  SolverConfig solver_;
};

class BarronsRunner final : public Runner {
 public:
  BarronsRunner(const ProblemDims& dims, const ResolvedLearner& p, const SolverConfig& solver)
      : state_(barrons_init(dims, p.beta, p.eta)), solver_(solver) {}

  RoundOutcome step(const MarketRound& r) override {
    RoundOutcome out;
    out.record.global_round = state_.round;
    out.record.epoch_round = state_.round;
    out.record.beta = state_.beta;
    out.record.x = state_.x.weights();
    const Vector previous_rates = state_.learning_rates;
    auto s = barrons_step(state_, r, solver_);
    out.loss = std::move(s.loss);

    const double eta = state_.eta_base;
    const Vector& rates = state_.learning_rates;
    auto flag = [&](const std::string& what) {
      out.violations.push_back("round " + std::to_string(out.record.global_round) + ": " + what);
    };
    if (rates.minCoeff() < eta * (1.0 - 1e-12) ||
        rates.maxCoeff() > std::exp(1.0) * eta * (1.0 + 1e-12)) {
      flag("learning rates left the band [eta, e*eta]");
    }
    if ((rates.array() < previous_rates.array()).any()) flag("a learning rate decreased");
    const double dev = ((state_.x.weights().array() / out.record.x.array()) - 1.0).abs().maxCoeff();
    out.record.iterate_ratio_dev = dev;
    if (eta <= 1.0 / 300.0 && dev > iterate_stability_bound(eta) + kStabilitySlack) {
      std::ostringstream os;
      os.precision(17);
      os << "iterate moved by ratio " << dev;
      flag(os.str());
    }
    return out;
  }

 private:
  BarronsState state_;
  SolverConfig solver_;
};

class BaselineRunner final : public Runner {
 public:
  explicit BaselineRunner(std::unique_ptr<OnlineLearner> learner) : learner_(std::move(learner)) {}

  RoundOutcome step(const MarketRound& r) override {
    LearnerStep s = learner_->step(r);
    RoundOutcome out;
    out.record.global_round = ++round_;
    out.record.epoch_round = round_;
    out.record.x = std::move(s.played);
    out.loss = std::move(s.loss);
    return out;
  }

 private:
  std::unique_ptr<OnlineLearner> learner_;
  int round_ = 0;
};

std::unique_ptr<Runner> make_runner(const ResolvedLearner& p, const ProblemDims& dims,
                                    const SolverConfig& solver) {
  switch (p.kind) {
    case LearnerKind::Ada: return std::make_unique<AdaRunner>(dims, p, solver);
    case LearnerKind::Barrons: return std::make_unique<BarronsRunner>(dims, p, solver);
    case LearnerKind::Ons:
      return std::make_unique<BaselineRunner>(
          make_ons_learner(dims, OnsConfig{p.beta, p.mix}, solver));
    case LearnerKind::Eg: return std::make_unique<BaselineRunner>(make_eg_learner(dims, p.eta));
    case LearnerKind::Ogd: return std::make_unique<BaselineRunner>(make_ogd_learner(dims, p.eta));
    case LearnerKind::SoftBayes:
      return std::make_unique<BaselineRunner>(make_soft_bayes_learner(dims, p.eta));
    case LearnerKind::UpGrid:
      return std::make_unique<BaselineRunner>(make_universal_grid_learner(dims, p.up_resolution));
  }
  throw ValidationError("unsupported learner");
}

// Product of per-round wealth ratios kept as mantissa * 2^exponent.
class WealthRatio {
 public:
  void multiply(double factor) {
    int e = 0;
    mantissa_ = std::frexp(mantissa_ * factor, &e);
    exponent_ += e;
  }
  double negative_log() const {
    return -(std::log(mantissa_) + static_cast<double>(exponent_) * std::log(2.0));
  }

 private:
  double mantissa_ = 1.0;
  long exponent_ = 0;
};

class StrictAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.market.validate();
  auto market = generate(cfg.market);
  return run_experiment(cfg, std::move(market));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::vector<MarketRound> market) {
  cfg.solver.validate();
  if (market.empty()) throw ValidationError("market sequence is empty");
  const int n = market.front().size();
  for (const auto& r : market) {
    if (r.size() != n) throw ValidationError("market rounds differ in asset count");
  }
  if (cfg.market.kind == MarketKind::Csv && cfg.market.assets > 0 && cfg.market.assets != n) {
    throw ValidationError("market file has " + std::to_string(n) + " assets, expected " +
                          std::to_string(cfg.market.assets));
  }
  const ProblemDims dims(n, static_cast<int>(market.size()));

  ExperimentResult result;
  result.learner = resolve(cfg.learner, dims);
  result.market_spec = cfg.market;
  result.market_spec.assets = n;
  result.market_spec.horizon = dims.horizon();
  result.solver = cfg.solver;
  result.assets = n;
  result.horizon = dims.horizon();
  result.market = std::move(market);

  auto runner = make_runner(result.learner, dims, cfg.solver);
  auto& summary = result.summary;
  const auto run_start = std::chrono::steady_clock::now();
  double cumulative = 0.0;
  const double grad_cap = static_cast<double>(n) * dims.horizon();

  auto record_violation = [&](const std::string& what) {
    summary.invariant_violations.push_back(what);
    if (cfg.strict) throw StrictAbort(what);
  };

  try {
    for (const auto& r : result.market) {
      const auto t0 = std::chrono::steady_clock::now();
      RoundOutcome out = runner->step(r);
      const auto t1 = std::chrono::steady_clock::now();
      result.round_wall_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());

      RoundRecord& rec = out.record;
      rec.loss = out.loss.loss;
      cumulative += rec.loss;
      rec.cumulative_loss = cumulative;
      rec.grad_inf_norm = out.loss.gradient.lpNorm<Eigen::Infinity>();
      summary.max_grad_inf_norm = std::max(summary.max_grad_inf_norm, rec.grad_inf_norm);
      summary.epoch_count = std::max(summary.epoch_count, rec.epoch_index);
      if (rec.restart) ++summary.restarts;
      result.rounds.push_back(rec);

      const std::string where = "round " + std::to_string(rec.global_round) + ": ";
      const std::string membership = result.learner.clipped()
                                         ? clipped_membership_error(rec.x, dims)
                                         : simplex_membership_error(rec.x);
      if (!membership.empty()) record_violation(where + "played point " + membership);
      if (result.learner.clipped() && rec.grad_inf_norm > grad_cap * (1.0 + 1e-12)) {
        record_violation(where + "gradient sup-norm exceeds NT");
      }
      for (const auto& v : out.violations) record_violation(v);
    }
  } catch (const SolverFailure& e) {
    summary.completed = false;
    summary.error_kind = "solver";
    summary.error = e.what();
  } catch (const InvariantViolation& e) {
    summary.completed = false;
    summary.error_kind = "invariant";
    summary.error = e.what();
    summary.invariant_violations.push_back(e.what());
  } catch (const StrictAbort& e) {
    summary.completed = false;
    summary.error_kind = "invariant";
    summary.error = std::string("strict mode: ") + e.what();
  }

  summary.total_loss = cumulative;
  const std::vector<MarketRound> played(result.market.begin(),
                                        result.market.begin() +
                                            static_cast<std::ptrdiff_t>(result.rounds.size()));
  if (!played.empty()) {
    try {
      const CrpSolution crp = best_crp(played, dims, cfg.solver);
      summary.best_crp = crp.weights.weights();
      summary.best_crp_loss = crp.total_loss;
    } catch (const SolverFailure& e) {
      summary.best_crp = e.last_iterate();
      summary.best_crp_loss = crp_total_loss(summary.best_crp, played);
      if (summary.completed) {
        summary.completed = false;
        summary.error_kind = "solver";
        summary.error = std::string("best CRP: ") + e.what();
      }
    }
    summary.regret = summary.total_loss - summary.best_crp_loss;

    WealthRatio ratio;
    for (std::size_t t = 0; t < played.size(); ++t) {
      const Vector& r = played[t].relatives();
      ratio.multiply(result.rounds[t].x.dot(r) / summary.best_crp.dot(r));
    }
    summary.wealth_ratio_regret = ratio.negative_log();
    if (std::abs(summary.wealth_ratio_regret - summary.regret) >
        1e-6 * std::max(1.0, std::abs(summary.regret))) {
      summary.invariant_violations.push_back("additive and multiplicative regret disagree");
    }
  } else {
    summary.best_crp = Vector::Constant(n, 1.0 / n);
  }
  result.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - run_start)
          .count();
  return result;
}

SweepResult sweep(const SweepConfig& cfg) {
  if (cfg.horizons.empty()) throw ValidationError("sweep needs at least one horizon");
  for (std::size_t k = 1; k < cfg.horizons.size(); ++k) {
    if (cfg.horizons[k] <= cfg.horizons[k - 1]) {
      throw ValidationError("sweep horizons must be strictly increasing");
    }
  }
  if (cfg.repetitions < 1) throw ValidationError("sweep needs at least one repetition");
  if (cfg.market.kind == MarketKind::Csv) {
    throw ValidationError("sweeps run on synthetic markets only");
  }

  struct Job {
    int horizon;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (int horizon : cfg.horizons) {
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      jobs.push_back({horizon, cfg.market.seed + static_cast<std::uint64_t>(rep)});
    }
  }

  SweepResult result;
  result.horizons = cfg.horizons;
  result.rows.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      SweepRow& row = result.rows[k];
      row.learner = to_string(cfg.learner.kind);
      row.market = to_string(cfg.market.kind);
      row.assets = cfg.market.assets;
      row.horizon = jobs[k].horizon;
      row.seed = jobs[k].seed;
      try {
        ExperimentConfig exp{cfg.learner, cfg.market, cfg.solver, false};
        exp.market.horizon = jobs[k].horizon;
        exp.market.seed = jobs[k].seed;
        const ExperimentResult r = run_experiment(exp);
        row.regret = r.summary.regret;
        row.epochs = r.summary.epoch_count;
        row.max_grad = r.summary.max_grad_inf_norm;
        row.runtime_ms = r.runtime_ms;
        row.completed = r.summary.completed;
        row.error = r.summary.error;
      } catch (const std::exception& e) {
        row.completed = false;
        row.error = e.what();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(jobs.size())));
  {
    std::vector<std::jthread> pool;
    for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
  }

  std::sort(result.rows.begin(), result.rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.horizon, a.seed) < std::tie(b.horizon, b.seed);
  });
  for (int horizon : cfg.horizons) {
    double sum = 0.0;
    int count = 0;
    for (const auto& row : result.rows) {
      if (row.horizon == horizon && row.completed) {
        sum += row.regret;
        ++count;
      }
    }
    result.mean_regret.push_back(count > 0 ? sum / count : std::nan(""));
  }
  for (std::size_t k = 1; k < result.mean_regret.size(); ++k) {
    result.growth.push_back(result.mean_regret[k] / result.mean_regret[k - 1]);
  }
  return result;
}

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out.precision(17);
  out << "learner,market,N,T,seed,regret,epochs,G,runtime_ms\n";
  for (const auto& row : result.rows) {
    out << row.learner << ',' << row.market << ',' << row.assets << ',' << row.horizon << ','
        << row.seed << ',';
    if (row.completed) {
      out << row.regret;
    } else {
      out << "nan";
    }
    out << ',' << row.epochs << ',' << row.max_grad << ',' << row.runtime_ms << '\n';
  }
}

}  // namespace barrons
