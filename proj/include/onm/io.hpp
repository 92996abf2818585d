#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "onm/bench.hpp"

namespace onm::io {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// 17 significant digits via std::to_chars: round-trip exact and
// locale-independent.
std::string format_double(double x);

// Parses and validates an experiment configuration.  Unknown keys are
// rejected so typos fail loudly.
bench::ExperimentConfig config_from_json(const nlohmann::json& j);
bench::ExperimentConfig load_config(const std::string& path);

// Fully resolved echo of a config (defaults filled in, stable key order).
nlohmann::ordered_json config_to_json(const bench::ExperimentConfig& config);

struct RunManifest {
  std::string config_path;
  nlohmann::ordered_json resolved_config;
  std::uint64_t master_seed = 0;
  std::string tool_version;
  std::string timestamp;  // ISO-8601 UTC; omitted from summary.json
  std::string output_dir;
  std::size_t threads = 0;
};

// Columns: t,onm_regret_mean,onm_regret_stderr,ogd_regret_mean,ogd_regret_stderr.
void write_regret_csv(const bench::ExperimentReport& report, const std::string& path);

// Columns: t,replication,target_x,target_y,onm_x,onm_y,ogd_x,ogd_y.
// Covers the first config.trajectory_replications completed replications.
void write_trajectory_csv(const bench::ExperimentReport& report, const std::string& path);

// Deterministic summary: final regrets, variation, tracking statistics,
// bound outcomes, aggregated assumption checklist, and the manifest minus
// its timestamp.
nlohmann::ordered_json summary_json(const bench::ExperimentReport& report,
                                    const RunManifest& manifest);
void write_summary_json(const bench::ExperimentReport& report, const RunManifest& manifest,
                        const std::string& path);

// Full manifest including the timestamp (excluded from determinism checks).
void write_manifest_json(const RunManifest& manifest, const std::string& path);

std::string current_utc_timestamp();

}  // namespace onm::io
