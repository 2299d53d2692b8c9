// Command-line front end: run, sweep, verify, gen.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "barrons/harness.hpp"
#include "barrons/markets.hpp"
#include "barrons/trace_io.hpp"
#include "barrons/verify.hpp"

namespace {

enum Exit : int { kOk = 0, kValidation = 1, kSolver = 2, kVerification = 3 };

struct MarketFlags {
  std::string market = "cover_alternating";
  std::string csv;
  int n = 2;
  int horizon = 256;
  std::uint64_t seed = 1;
  double epsilon = 1.0 / 32.0;
  int flip_period = 0;
  double sigma = 0.3;

  void attach(CLI::App& cmd) {
    cmd.add_option("--market", market, "market kind")
        ->check(CLI::IsMember({"cover_alternating", "blowup", "iid_lognormal", "constant"}));
    cmd.add_option("--csv", csv, "price-relative CSV instead of a synthetic market");
    cmd.add_option("--n", n, "number of assets");
    cmd.add_option("--t-horizon", horizon, "number of rounds");
    cmd.add_option("--seed", seed, "random seed");
    cmd.add_option("--epsilon", epsilon, "blowup: relative of the losing assets");
    cmd.add_option("--flip-period", flip_period, "blowup: rounds between flips (0 = T/2)");
    cmd.add_option("--sigma", sigma, "iid_lognormal: log-return standard deviation");
  }

  barrons::MarketSpec spec() const {
    barrons::MarketSpec s;
    if (!csv.empty()) {
      s.kind = barrons::MarketKind::Csv;
      s.csv_path = csv;
      s.assets = 0;
    } else {
      s.kind = barrons::parse_market_kind(market);
      s.assets = n;
      s.horizon = horizon;
    }
    s.seed = seed;
    s.epsilon = epsilon;
    s.flip_period = flip_period;
    s.sigma = sigma;
    return s;
  }
};

struct LearnerFlags {
  std::string learner = "ada";
  std::optional<double> beta;
  std::optional<double> eta;
  std::optional<double> gamma;
  double mix = 0.0;
  double up_resolution = 0.01;
  double solver_tol = 1e-10;

  void attach(CLI::App& cmd) {
    cmd.add_option("--learner", learner, "learner")
        ->check(CLI::IsMember({"ada", "barrons", "ons", "eg", "ogd", "softbayes", "up-grid"}));
    cmd.add_option("--beta", beta, "ONS strength (ada: initial beta)");
    cmd.add_option("--eta", eta, "base learning rate or step size");
    cmd.add_option("--gamma", gamma, "ada: leader barrier weight");
    cmd.add_option("--mix", mix, "ons: uniform mixing weight");
    cmd.add_option("--up-resolution", up_resolution, "up-grid: grid spacing");
    cmd.add_option("--solver-tol", solver_tol, "squared Newton decrement tolerance");
  }

  barrons::LearnerConfig config() const {
    barrons::LearnerConfig c;
    c.kind = barrons::parse_learner_kind(learner);
    c.beta = beta;
    c.eta = eta;
    c.gamma = gamma;
    c.mix = mix;
    c.up_resolution = up_resolution;
    return c;
  }

  barrons::SolverConfig solver() const {
    barrons::SolverConfig s;
    s.kkt_tol = solver_tol;
    return s;
  }
};

std::filesystem::path metadata_path(const std::filesystem::path& out) {
  return out.string() + ".meta.json";
}

int report_verification(const barrons::VerifyReport& report) {
  for (const auto& note : report.notes) std::cout << "note: " << note << '\n';
  for (const auto& issue : report.issues) {
    if (issue.round > 0) {
      std::cout << "FAIL round " << issue.round << ": " << issue.message << '\n';
    } else {
      std::cout << "FAIL summary: " << issue.message << '\n';
    }
  }
  std::cout << (report.ok() ? "verification passed" : "verification failed") << " ("
            << report.rounds_checked << " rounds, " << report.restarts_checked
            << " restarts checked)\n";
  return report.ok() ? kOk : kVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive log-barrier online portfolio learners and baselines"};
  app.require_subcommand(1);

  MarketFlags run_market;
  LearnerFlags run_learner;
  std::string run_out;
  bool strict = false;
  auto* run = app.add_subcommand("run", "run one learner on one market");
  run_market.attach(*run);
  run_learner.attach(*run);
  run->add_option("--out", run_out, "trace JSON path");
  run->add_flag("--strict", strict, "abort on the first invariant violation");

  MarketFlags sweep_market;
  LearnerFlags sweep_learner;
  std::vector<int> horizons;
  int repetitions = 1;
  int threads = 1;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "regret over several horizons");
  sweep_market.attach(*sweep);
  sweep_learner.attach(*sweep);
  sweep->add_option("--horizons", horizons, "increasing list of T values")->delimiter(',');
  sweep->add_option("--repetitions", repetitions, "seeded runs per horizon");
  sweep->add_option("--threads", threads, "parallel runs");
  sweep->add_option("--out", sweep_out, "output stem: writes <out>.csv and <out>.json")->required();

  std::string trace_path;
  auto* verify = app.add_subcommand("verify", "re-check a persisted trace");
  verify->add_option("trace", trace_path, "trace JSON")->required();

  MarketFlags gen_market;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "write a synthetic market as CSV");
  gen_market.attach(*gen);
  gen->add_option("--out", gen_out, "CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kValidation;
  }

  try {
    if (*run) {
      const barrons::ExperimentConfig cfg{run_learner.config(), run_market.spec(),
                                          run_learner.solver(), strict};
      const auto result = barrons::run_experiment(cfg);
      const auto& s = result.summary;
      if (!run_out.empty()) {
        barrons::write_trace(run_out, result);
        barrons::write_run_metadata(metadata_path(run_out), result);
      }
      std::cout.precision(10);
      std::cout << "learner " << barrons::to_string(result.learner.kind) << ", market "
                << barrons::to_string(result.market_spec.kind) << ", N=" << result.assets
                << ", T=" << result.horizon << '\n'
                << "rounds played   " << result.rounds.size() << '\n'
                << "total loss      " << s.total_loss << '\n'
                << "best CRP loss   " << s.best_crp_loss << '\n'
                << "regret          " << s.regret << '\n'
                << "epochs          " << s.epoch_count << '\n'
                << "max |grad|_inf  " << s.max_grad_inf_norm << '\n'
                << "violations      " << s.invariant_violations.size() << '\n';
      for (const auto& v : s.invariant_violations) std::cerr << "violation: " << v << '\n';
      if (!s.completed) {
        std::cerr << "error: " << s.error << '\n';
        return s.error_kind == "solver" ? kSolver : kVerification;
      }
      return s.invariant_violations.empty() ? kOk : kVerification;
    }

    if (*sweep) {
      barrons::SweepConfig cfg;
      cfg.learner = sweep_learner.config();
      cfg.market = sweep_market.spec();
      cfg.horizons = horizons;
      cfg.repetitions = repetitions;
      cfg.solver = sweep_learner.solver();
      cfg.threads = threads;
      const auto result = barrons::sweep(cfg);
      barrons::write_sweep_csv(sweep_out + ".csv", result);
      std::ofstream(sweep_out + ".json") << barrons::sweep_to_json(result).dump(1) << '\n';
      std::cout.precision(8);
      for (std::size_t k = 0; k < result.horizons.size(); ++k) {
        std::cout << "T=" << result.horizons[k] << "  mean regret " << result.mean_regret[k];
        if (k > 0) std::cout << "  growth " << result.growth[k - 1];
        std::cout << '\n';
      }
      for (const auto& row : result.rows) {
        if (!row.completed) std::cerr << "T=" << row.horizon << " seed " << row.seed << ": " << row.error << '\n';
      }
      return kOk;
    }

    if (*verify) {
      return report_verification(barrons::verify_trace(barrons::read_trace(trace_path)));
    }

    if (*gen) {
      const auto spec = gen_market.spec();
      if (spec.kind == barrons::MarketKind::Csv) {
        throw barrons::ValidationError("gen needs a synthetic market kind");
      }
      barrons::write_csv(gen_out, barrons::generate(spec));
      return kOk;
    }
  } catch (const barrons::SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolver;
  } catch (const barrons::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kVerification;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
  return kOk;
}
