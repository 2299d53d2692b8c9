#include "barrons/trace_io.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

namespace barrons {

using nlohmann::json;

namespace {

json vec_to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vec_from_json(const json& arr) {
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  return v;
}

template <typename T>
void put_optional(json& obj, const char* key, const std::optional<T>& value) {
  if (value) {
    if constexpr (std::is_same_v<T, Vector>) {
      obj[key] = vec_to_json(*value);
    } else {
      obj[key] = *value;
    }
  }
}

std::optional<double> get_optional(const json& obj, const char* key) {
  if (auto it = obj.find(key); it != obj.end() && !it->is_null()) return it->get<double>();
  return std::nullopt;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

}  // namespace

json trace_to_json(const ExperimentResult& result) {
  json doc;
  doc["schema_version"] = kTraceSchemaVersion;

  const auto& p = result.learner;
  doc["learner"] = {
      {"kind", to_string(p.kind)}, {"beta", p.beta},   {"eta", p.eta},
      {"gamma", p.gamma},          {"mix", p.mix},     {"up_resolution", p.up_resolution},
      {"clipped", p.clipped()},
  };

  const auto& m = result.market_spec;
  doc["market"] = {
      {"kind", to_string(m.kind)}, {"n", result.assets},
      {"t", result.horizon},       {"seed", m.seed},
      {"epsilon", m.epsilon},      {"flip_period", m.flip_period},
      {"sigma", m.sigma},          {"csv_path", m.csv_path.string()},
  };

  const auto& s = result.solver;
  doc["solver"] = {
      {"kkt_tol", s.kkt_tol},
      {"max_newton_iters", s.max_newton_iters},
      {"barrier_mu_init", s.barrier_mu_init},
      {"barrier_shrink", s.barrier_shrink},
      {"min_barrier_mu", s.min_barrier_mu},
  };

  json relatives = json::array();
  for (const auto& r : result.market) relatives.push_back(vec_to_json(r.relatives()));
  doc["price_relatives"] = std::move(relatives);

  json rounds = json::array();
  for (const auto& rec : result.rounds) {
    json row = {
        {"global_round", rec.global_round},
        {"epoch_index", rec.epoch_index},
        {"epoch_round", rec.epoch_round},
        {"x", vec_to_json(rec.x)},
        {"loss", rec.loss},
        {"cumulative_loss", rec.cumulative_loss},
        {"grad_inf_norm", rec.grad_inf_norm},
        {"restart", rec.restart},
    };
    put_optional(row, "beta", rec.beta);
    put_optional(row, "alpha", rec.alpha);
    put_optional(row, "leader", rec.leader);
    put_optional(row, "ratio_max", rec.ratio_max);
    put_optional(row, "iterate_ratio_dev", rec.iterate_ratio_dev);
    put_optional(row, "leader_ratio_dev", rec.leader_ratio_dev);
    rounds.push_back(std::move(row));
  }
  doc["per_round"] = std::move(rounds);

  const auto& sum = result.summary;
  doc["summary"] = {
      {"total_loss", sum.total_loss},
      {"best_crp_loss", sum.best_crp_loss},
      {"best_crp", vec_to_json(sum.best_crp)},
      {"regret", sum.regret},
      {"wealth_ratio_regret", sum.wealth_ratio_regret},
      {"epoch_count", sum.epoch_count},
      {"restarts", sum.restarts},
      {"max_grad_inf_norm", sum.max_grad_inf_norm},
      {"invariant_violations", sum.invariant_violations},
      {"completed", sum.completed},
      {"error", sum.error},
      {"error_kind", sum.error_kind},
  };
  return doc;
}

ExperimentResult trace_from_json(const json& doc) {
  try {
    if (doc.at("schema_version").get<int>() != kTraceSchemaVersion) {
      throw ValidationError("unsupported trace schema version");
    }
    ExperimentResult result;
    const auto& l = doc.at("learner");
    result.learner.kind = parse_learner_kind(l.at("kind").get<std::string>());
    result.learner.beta = l.at("beta").get<double>();
    result.learner.eta = l.at("eta").get<double>();
    result.learner.gamma = l.at("gamma").get<double>();
    result.learner.mix = l.at("mix").get<double>();
    result.learner.up_resolution = l.at("up_resolution").get<double>();

    const auto& m = doc.at("market");
    result.market_spec.kind = parse_market_kind(m.at("kind").get<std::string>());
    result.assets = m.at("n").get<int>();
    result.horizon = m.at("t").get<int>();
    result.market_spec.assets = result.assets;
    result.market_spec.horizon = result.horizon;
    result.market_spec.seed = m.at("seed").get<std::uint64_t>();
    result.market_spec.epsilon = m.at("epsilon").get<double>();
    result.market_spec.flip_period = m.at("flip_period").get<int>();
    result.market_spec.sigma = m.at("sigma").get<double>();
    result.market_spec.csv_path = m.at("csv_path").get<std::string>();

    const auto& s = doc.at("solver");
    result.solver.kkt_tol = s.at("kkt_tol").get<double>();
    result.solver.max_newton_iters = s.at("max_newton_iters").get<int>();
    result.solver.barrier_mu_init = s.at("barrier_mu_init").get<double>();
    result.solver.barrier_shrink = s.at("barrier_shrink").get<double>();
    result.solver.min_barrier_mu = s.at("min_barrier_mu").get<double>();

    for (const auto& row : doc.at("price_relatives")) {
      result.market.push_back(MarketRound::normalize(vec_from_json(row)));
    }

    for (const auto& row : doc.at("per_round")) {
      RoundRecord rec;
      rec.global_round = row.at("global_round").get<int>();
      rec.epoch_index = row.at("epoch_index").get<int>();
      rec.epoch_round = row.at("epoch_round").get<int>();
      rec.x = vec_from_json(row.at("x"));
      rec.loss = row.at("loss").get<double>();
      rec.cumulative_loss = row.at("cumulative_loss").get<double>();
      rec.grad_inf_norm = row.at("grad_inf_norm").get<double>();
      rec.restart = row.at("restart").get<bool>();
      rec.beta = get_optional(row, "beta");
      rec.alpha = get_optional(row, "alpha");
      if (auto it = row.find("leader"); it != row.end()) rec.leader = vec_from_json(*it);
      rec.ratio_max = get_optional(row, "ratio_max");
      rec.iterate_ratio_dev = get_optional(row, "iterate_ratio_dev");
      rec.leader_ratio_dev = get_optional(row, "leader_ratio_dev");
      result.rounds.push_back(std::move(rec));
    }

    const auto& sum = doc.at("summary");
    result.summary.total_loss = sum.at("total_loss").get<double>();
    result.summary.best_crp_loss = sum.at("best_crp_loss").get<double>();
    result.summary.best_crp = vec_from_json(sum.at("best_crp"));
    result.summary.regret = sum.at("regret").get<double>();
    result.summary.wealth_ratio_regret = sum.at("wealth_ratio_regret").get<double>();
    result.summary.epoch_count = sum.at("epoch_count").get<int>();
    result.summary.restarts = sum.at("restarts").get<int>();
    result.summary.max_grad_inf_norm = sum.at("max_grad_inf_norm").get<double>();
    result.summary.invariant_violations =
        sum.at("invariant_violations").get<std::vector<std::string>>();
    result.summary.completed = sum.at("completed").get<bool>();
    result.summary.error = sum.at("error").get<std::string>();
    result.summary.error_kind = sum.at("error_kind").get<std::string>();
    return result;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed trace: ") + e.what());
  }
}

std::string serialize_trace(const ExperimentResult& result) {
  return trace_to_json(result).dump(1) + "\n";
}

void write_trace(const std::filesystem::path& path, const ExperimentResult& result) {
  write_text(path, serialize_trace(result));
}

ExperimentResult read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open trace " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("trace is not valid JSON: ") + e.what());
  }
  return trace_from_json(doc);
}

void write_run_metadata(const std::filesystem::path& path, const ExperimentResult& result) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  json meta = {
      {"timestamp", stamp},
      {"runtime_ms", result.runtime_ms},
      {"round_wall_ms", result.round_wall_ms},
  };
  write_text(path, meta.dump(1) + "\n");
}

json sweep_to_json(const SweepResult& result) {
  json rows = json::array();
  for (const auto& row : result.rows) {
    rows.push_back({
        {"learner", row.learner},
        {"market", row.market},
        {"N", row.assets},
        {"T", row.horizon},
        {"seed", row.seed},
        {"regret", row.completed ? json(row.regret) : json(nullptr)},
        {"epochs", row.epochs},
        {"G", row.max_grad},
        {"runtime_ms", row.runtime_ms},
        {"completed", row.completed},
        {"error", row.error},
    });
  }
  json mean = json::array();
  for (double v : result.mean_regret) mean.push_back(std::isfinite(v) ? json(v) : json(nullptr));
  json growth = json::array();
  for (double v : result.growth) growth.push_back(std::isfinite(v) ? json(v) : json(nullptr));
  return {{"rows", rows}, {"horizons", result.horizons}, {"mean_regret", mean},
          {"growth", growth}};
}

}  // namespace barrons
