#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "barrons/harness.hpp"

namespace barrons {

inline constexpr int kTraceSchemaVersion = 1;

/// Full trace: configuration, market, per-round records and summary. Contains
/// no wall-clock data, so identical runs serialize to identical bytes.
nlohmann::json trace_to_json(const ExperimentResult& result);
ExperimentResult trace_from_json(const nlohmann::json& doc);

std::string serialize_trace(const ExperimentResult& result);
void write_trace(const std::filesystem::path& path, const ExperimentResult& result);
ExperimentResult read_trace(const std::filesystem::path& path);

/// Timing sidecar: timestamp, total and per-round wall time.
void write_run_metadata(const std::filesystem::path& path, const ExperimentResult& result);

nlohmann::json sweep_to_json(const SweepResult& result);

}  // namespace barrons
