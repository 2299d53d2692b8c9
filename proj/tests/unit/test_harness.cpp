#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "barrons/harness.hpp"
#include "barrons/trace_io.hpp"
#include "barrons/verify.hpp"

using namespace barrons;

namespace {

ExperimentConfig config(LearnerKind learner, MarketKind market, int n, int horizon,
                        std::uint64_t seed = 0) {
  ExperimentConfig cfg;
  cfg.learner.kind = learner;
  cfg.market.kind = market;
  cfg.market.assets = n;
  cfg.market.horizon = horizon;
  cfg.market.seed = seed;
  return cfg;
}

const std::vector<LearnerKind> kAllLearners = {
    LearnerKind::Ada, LearnerKind::Barrons, LearnerKind::Ons,   LearnerKind::Eg,
    LearnerKind::Ogd, LearnerKind::SoftBayes, LearnerKind::UpGrid};

bool mentions_round(const VerifyReport& report, int round) {
  for (const auto& issue : report.issues) {
    if (issue.round == round) return true;
  }
  return false;
}

}  // namespace

TEST(RunExperiment, AdaOnConstantMarket) {
  const auto res = run_experiment(config(LearnerKind::Ada, MarketKind::Constant, 2, 16));
  EXPECT_NEAR(res.summary.regret, 0.0, 1e-9);
  EXPECT_EQ(res.summary.epoch_count, 1);
  EXPECT_EQ(res.summary.restarts, 0);
  EXPECT_TRUE(res.summary.completed);
  EXPECT_TRUE(res.summary.invariant_violations.empty());
}

TEST(RunExperiment, AdaOnBlowupRestarts) {
  const auto res = run_experiment(config(LearnerKind::Ada, MarketKind::Blowup, 2, 64));
  EXPECT_GE(res.summary.epoch_count, 2);
  EXPECT_TRUE(res.summary.invariant_violations.empty());
  const auto report = verify_trace(res);
  EXPECT_TRUE(report.ok());
  EXPECT_GE(report.restarts_checked, 1);
}

TEST(RunExperiment, OnsOnBlowupRecordsLargeGradient) {
  auto cfg = config(LearnerKind::Ons, MarketKind::Blowup, 2, 64);
  const auto res = run_experiment(cfg);
  EXPECT_GE(res.summary.max_grad_inf_norm, 16.0);
  double g = 0.0;
  for (const auto& rec : res.rounds) g = std::max(g, rec.grad_inf_norm);
  EXPECT_EQ(g, res.summary.max_grad_inf_norm);
}

TEST(RunExperiment, RegretArithmetic) {
  for (auto kind : kAllLearners) {
    const auto res = run_experiment(config(kind, MarketKind::IidLognormal, 2, 60, 3));
    double prefix = 0.0;
    for (const auto& rec : res.rounds) {
      prefix += rec.loss;
      EXPECT_EQ(rec.cumulative_loss, prefix);
    }
    EXPECT_EQ(res.summary.total_loss, prefix);
    EXPECT_EQ(res.summary.regret, res.summary.total_loss - res.summary.best_crp_loss);
    EXPECT_NEAR(res.summary.wealth_ratio_regret, res.summary.regret,
                1e-6 * std::max(1.0, std::abs(res.summary.regret)));
    EXPECT_TRUE(verify_trace(res).ok()) << to_string(kind);
  }
}

TEST(RunExperiment, EveryLearnerIsExactOnConstantMarket) {
  for (auto kind : kAllLearners) {
    const auto res = run_experiment(config(kind, MarketKind::Constant, 3, 30));
    EXPECT_LE(std::abs(res.summary.regret), 1e-9) << to_string(kind);
    EXPECT_EQ(res.summary.restarts, 0);
    for (const auto& rec : res.rounds) {
      EXPECT_LE((rec.x.array() - 1.0 / 3.0).abs().maxCoeff(), 1e-12) << to_string(kind);
    }
  }
}

TEST(RunExperiment, RegretAboveSmoothingSlackOnCoverMarket) {
  for (auto kind : kAllLearners) {
    const auto res = run_experiment(config(kind, MarketKind::CoverAlternating, 2, 128));
    EXPECT_GE(res.summary.regret, -2.0) << to_string(kind);
  }
}

TEST(RunExperiment, CsvMarketNeedsHorizonAboveAssetCount) {
  const auto path = std::filesystem::temp_directory_path() / "barrons_short.csv";
  std::ofstream(path) << "1.0,0.5\n0.5,1.0\n";
  ExperimentConfig cfg;
  cfg.market.kind = MarketKind::Csv;
  cfg.market.csv_path = path;
  cfg.market.assets = 0;
  EXPECT_THROW(run_experiment(cfg), ValidationError);
  std::filesystem::remove(path);
}

TEST(RunExperiment, SolverFailureKeepsPartialTrace) {
  auto cfg = config(LearnerKind::Ada, MarketKind::Blowup, 2, 64);
  cfg.solver.max_newton_iters = 1;
  const auto res = run_experiment(cfg);
  EXPECT_FALSE(res.summary.completed);
  EXPECT_EQ(res.summary.error_kind, "solver");
  EXPECT_LT(res.rounds.size(), 64u);
  EXPECT_EQ(res.market.size(), 64u);
  EXPECT_TRUE(verify_trace(res).ok());
}

TEST(RunExperiment, Deterministic) {
  const auto cfg = config(LearnerKind::Ada, MarketKind::IidLognormal, 3, 80, 5);
  EXPECT_EQ(serialize_trace(run_experiment(cfg)), serialize_trace(run_experiment(cfg)));
}

TEST(Sweep, ValidatesHorizons) {
  SweepConfig cfg;
  cfg.market.kind = MarketKind::CoverAlternating;
  EXPECT_THROW(sweep(cfg), ValidationError);
  cfg.horizons = {64, 32};
  EXPECT_THROW(sweep(cfg), ValidationError);
}

TEST(Sweep, SeededRepetitionsAreDeterministic) {
  SweepConfig cfg;
  cfg.learner.kind = LearnerKind::Ada;
  cfg.market.kind = MarketKind::IidLognormal;
  cfg.market.assets = 2;
  cfg.market.seed = 40;
  cfg.horizons = {32, 64};
  cfg.repetitions = 3;
  const auto serial = sweep(cfg);
  cfg.threads = 4;
  const auto parallel = sweep(cfg);
  ASSERT_EQ(serial.rows.size(), 6u);
  EXPECT_EQ(serial.growth.size(), 1u);
  for (std::size_t k = 0; k < serial.rows.size(); ++k) {
    EXPECT_EQ(serial.rows[k].seed, 40u + k % 3);
    EXPECT_EQ(serial.rows[k].horizon, k < 3 ? 32 : 64);
    EXPECT_EQ(serial.rows[k].regret, parallel.rows[k].regret);
  }
  EXPECT_NE(serial.rows[0].regret, serial.rows[1].regret);

  const auto path = std::filesystem::temp_directory_path() / "barrons_sweep.csv";
  write_sweep_csv(path, serial);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "learner,market,N,T,seed,regret,epochs,G,runtime_ms");
  std::filesystem::remove(path);
}

TEST(Trace, RoundTripIsLossless) {
  const auto res = run_experiment(config(LearnerKind::Ada, MarketKind::Blowup, 2, 64));
  const std::string text = serialize_trace(res);
  const auto back = trace_from_json(nlohmann::json::parse(text));
  EXPECT_EQ(serialize_trace(back), text);
  EXPECT_TRUE(verify_trace(back).ok());

  const auto path = std::filesystem::temp_directory_path() / "barrons_trace.json";
  write_trace(path, res);
  EXPECT_EQ(serialize_trace(read_trace(path)), text);
  std::filesystem::remove(path);
}

TEST(Trace, RejectsMalformedInput) {
  EXPECT_THROW(trace_from_json(nlohmann::json::parse(R"({"schema_version": 99})")),
               ValidationError);
  EXPECT_THROW(trace_from_json(nlohmann::json::parse(R"({"schema_version": 1})")),
               ValidationError);
  const auto path = std::filesystem::temp_directory_path() / "barrons_bad.json";
  std::ofstream(path) << "{ not json";
  EXPECT_THROW(read_trace(path), ValidationError);
  std::filesystem::remove(path);
}

TEST(Verify, DetectsPointOffSimplex) {
  auto res = run_experiment(config(LearnerKind::Ada, MarketKind::CoverAlternating, 2, 40));
  ASSERT_TRUE(verify_trace(res).ok());
  res.rounds[12].x[0] += 0.01;
  const auto report = verify_trace(res);
  EXPECT_FALSE(report.ok());
  EXPECT_TRUE(mentions_round(report, 13));
}

TEST(Verify, DetectsBetaNotHalvedAtRestart) {
  auto res = run_experiment(config(LearnerKind::Ada, MarketKind::Blowup, 2, 64));
  std::size_t k = 0;
  while (k < res.rounds.size() && !res.rounds[k].restart) ++k;
  ASSERT_LT(k + 1, res.rounds.size());
  res.rounds[k + 1].beta = res.rounds[k].beta;
  const auto report = verify_trace(res);
  EXPECT_FALSE(report.ok());
  EXPECT_TRUE(mentions_round(report, static_cast<int>(k) + 2));
}

TEST(Verify, DetectsTamperedLossAndRegret) {
  auto res = run_experiment(config(LearnerKind::Ons, MarketKind::IidLognormal, 3, 30, 2));
  auto tampered = res;
  tampered.rounds[4].loss += 1e-3;
  EXPECT_TRUE(mentions_round(verify_trace(tampered), 5));
  tampered = res;
  tampered.summary.regret -= 0.5;
  EXPECT_FALSE(verify_trace(tampered).ok());
  tampered = res;
  tampered.rounds[7].restart = true;
  EXPECT_FALSE(verify_trace(tampered).ok());
}

TEST(Verify, DetectsSuppressedRestart) {
  auto res = run_experiment(config(LearnerKind::Ada, MarketKind::Blowup, 2, 64));
  std::size_t k = 0;
  while (k < res.rounds.size() && !res.rounds[k].restart) ++k;
  ASSERT_LT(k, res.rounds.size());
  res.rounds[k].restart = false;
  EXPECT_TRUE(mentions_round(verify_trace(res), static_cast<int>(k) + 1));
}
