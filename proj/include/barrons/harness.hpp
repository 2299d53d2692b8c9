#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "barrons/ada_barrons.hpp"
#include "barrons/baselines.hpp"
#include "barrons/markets.hpp"

namespace barrons {

enum class LearnerKind { Ada, Barrons, Ons, Eg, Ogd, SoftBayes, UpGrid };

std::string to_string(LearnerKind kind);
LearnerKind parse_learner_kind(const std::string& name);

/// Learner parameters as requested; unset values take per-learner defaults.
struct LearnerConfig {
  LearnerKind kind = LearnerKind::Ada;
  std::optional<double> beta;
  std::optional<double> eta;
  std::optional<double> gamma;
  double mix = 0.0;
  double up_resolution = 0.01;
};

/// Learner parameters with every default filled in for a concrete (N, T).
struct ResolvedLearner {
  LearnerKind kind = LearnerKind::Ada;
  double beta = 0.0;   // ada, barrons, ons
  double eta = 0.0;    // ada/barrons eta_base, or the first-order step size
  double gamma = 0.0;  // ada
  double mix = 0.0;    // ons
  double up_resolution = 0.0;

  bool clipped() const;
};

ResolvedLearner resolve(const LearnerConfig& cfg, const ProblemDims& dims);

struct ExperimentConfig {
  LearnerConfig learner;
  MarketSpec market;
  SolverConfig solver;
  /// Stop at the first invariant violation instead of recording and continuing.
  bool strict = false;
};

struct RoundRecord {
  int global_round = 0;
  int epoch_index = 1;
  int epoch_round = 0;
  std::optional<double> beta;
  Vector x;
  double loss = 0.0;
  double cumulative_loss = 0.0;
  double grad_inf_norm = 0.0;
  bool restart = false;
  std::optional<double> alpha;
  std::optional<Vector> leader;
  std::optional<double> ratio_max;
  std::optional<double> iterate_ratio_dev;
  std::optional<double> leader_ratio_dev;
};

struct ExperimentSummary {
  double total_loss = 0.0;
  double best_crp_loss = 0.0;
  Vector best_crp;
  double regret = 0.0;
  /// -ln(prod <x_t, r_t> / prod <u*, r_t>) accumulated multiplicatively.
  double wealth_ratio_regret = 0.0;
  int epoch_count = 1;
  int restarts = 0;
  double max_grad_inf_norm = 0.0;
  std::vector<std::string> invariant_violations;
  bool completed = true;
  std::string error;
  /// "", "solver", "invariant" or "validation": why the run stopped early.
  std::string error_kind;
};

struct ExperimentResult {
  ResolvedLearner learner;
  MarketSpec market_spec;
  SolverConfig solver;
  int assets = 0;
  int horizon = 0;
  std::vector<MarketRound> market;
  std::vector<RoundRecord> rounds;
  ExperimentSummary summary;
  /// Wall-clock data; kept out of the trace so traces are reproducible.
  std::vector<double> round_wall_ms;
  double runtime_ms = 0.0;
};

/// Runs one learner over one market, checking invariants every round. Solver
/// failures and invariant-bound breaches end the run early; the partial
/// result is still returned with `summary.completed == false`.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Same, over an already materialized market.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::vector<MarketRound> market);

struct SweepConfig {
  LearnerConfig learner;
  MarketSpec market;  // `horizon` and `seed` are overridden per run
  std::vector<int> horizons;
  int repetitions = 1;
  SolverConfig solver;
  int threads = 1;
};

struct SweepRow {
  std::string learner;
  std::string market;
  int assets = 0;
  int horizon = 0;
  std::uint64_t seed = 0;
  double regret = 0.0;
  int epochs = 0;
  double max_grad = 0.0;
  double runtime_ms = 0.0;
  bool completed = true;
  std::string error;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // sorted by (T, seed)
  std::vector<int> horizons;
  std::vector<double> mean_regret;  // per horizon
  std::vector<double> growth;       // mean_regret[k+1] / mean_regret[k]
};

/// Runs every (T, repetition) pair; repetition k uses seed base + k. A
/// failing run is recorded in its row and the sweep continues.
SweepResult sweep(const SweepConfig& cfg);

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result);

}  // namespace barrons
