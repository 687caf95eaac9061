#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "veritas/datasetio.hpp"
#include "veritas/judge.hpp"
#include "veritas/metrics.hpp"
#include "veritas/reward.hpp"

// Batch pipelines behind the command-line front end. Exit-code contract:
// 0 success, 1 validation/agreement failure, 2 configuration or I/O error.

namespace veritas::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitConfig = 2;

struct RunConfig {
    std::vector<std::string> inputs;
    std::string output_dir;
    reward::RewardWeights weights{0.9, 0.05, 0.02, 0.0};
    // Exactly one judge backend: the deterministic mock or an HTTP endpoint.
    bool mock = false;
    judge::JudgeBackendConfig judge;
    metrics::AggregatePolicy aggregation = metrics::AggregatePolicy::Mean;
    metrics::MatchScope match_scope = metrics::MatchScope::LastThink;
    reward::EmNormalization em_normalization = reward::EmNormalization::Standard;
    datasetio::SplitSpec split{0.8, 0};
    int parallelism = 1;
    std::string teacher;  // export teacher tag; defaults to the backend name
};

/// Overlay config-file keys onto a RunConfig. Unknown keys are errors to
/// catch typos. Throws judge::ConfigError.
void apply_config_json(const nlohmann::json& file, RunConfig& config);

/// Canonical form of the effective config (no filesystem paths), used for
/// the run manifest hash.
nlohmann::ordered_json config_to_json(const RunConfig& config);

/// Manifest written next to every output set: tool version, config hash,
/// input content hashes. Deterministic for identical config and inputs.
nlohmann::ordered_json run_manifest(const RunConfig& config,
                                    const std::string& command);

struct AgreeArgs {
    std::vector<std::string> inputs;  // 2 for a report, 3+ for a matrix
    std::optional<metrics::FaithDimension> dimension;  // filter
    bool matrix_csv = false;
};

struct ReportArgs {
    std::string rewards_file;
    std::string scores_file;    // PairScore JSONL
    std::string verdicts_file;  // optional; exact unparseable-as-zero rebuild
    std::string output_dir;
    metrics::AggregatePolicy aggregation = metrics::AggregatePolicy::Mean;
};

int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_score(const RunConfig& config, std::ostream& err);
int cmd_judge(const RunConfig& config, std::ostream& err);
int cmd_reward(const RunConfig& config, std::ostream& err);
int cmd_agree(const AgreeArgs& args, std::ostream& out, std::ostream& err);
int cmd_export(const RunConfig& config, std::ostream& err);
int cmd_report(const ReportArgs& args, std::ostream& err);

}  // namespace veritas::cli
