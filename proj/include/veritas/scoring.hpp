#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "veritas/datasetio.hpp"
#include "veritas/judge.hpp"
#include "veritas/metrics.hpp"
#include "veritas/report.hpp"
#include "veritas/reward.hpp"
#include "veritas/trajectory.hpp"

// Batch scoring: one pure kernel per trajectory (format check, pair
// extraction, judge calls, regex metric, combined reward) driven either by a
// serial loop or an OpenMP parallel-for. Both drivers produce identical
// results for any thread-safe backend; the serial path is the reference the
// parallel one is tested against.

namespace veritas::scoring {

struct ScoreOptions {
    reward::RewardWeights weights;
    metrics::AggregatePolicy aggregation = metrics::AggregatePolicy::Mean;
    metrics::MatchScope match_scope = metrics::MatchScope::LastThink;
    reward::EmNormalization em_normalization = reward::EmNormalization::Standard;
    int judge_max_attempts = 3;
    int parallelism = 1;  // worker threads for the batch loop
};

struct TrajectoryScore {
    std::string id;
    std::string dataset;
    trajectory::FormatVerdict verdict;
    std::vector<metrics::PairScore> pair_scores;  // defined labels only
    std::vector<judge::JudgeVerdict> judge_verdicts;
    std::optional<double> think_search;  // per-trajectory aggregates
    std::optional<double> info_think;
    std::optional<int> think_answer;
    reward::RewardBreakdown breakdown;
};

/// Score a single parsed corpus entry. Pure given a deterministic backend.
TrajectoryScore score_entry(const datasetio::CorpusEntry& entry,
                            const ScoreOptions& options,
                            judge::JudgeBackend& backend);

/// Reference driver: plain loop, input order.
std::vector<TrajectoryScore> score_corpus_serial(
    std::span<const datasetio::CorpusEntry> entries,
    const ScoreOptions& options, judge::JudgeBackend& backend);

/// OpenMP driver. Results are indexed by entry, so output order and content
/// match the serial reference exactly. Falls back to the serial loop when
/// built without OpenMP.
std::vector<TrajectoryScore> score_corpus_parallel(
    std::span<const datasetio::CorpusEntry> entries,
    const ScoreOptions& options, judge::JudgeBackend& backend);

/// Dispatch on options.parallelism (1 = serial reference).
std::vector<TrajectoryScore> score_corpus(
    std::span<const datasetio::CorpusEntry> entries,
    const ScoreOptions& options, judge::JudgeBackend& backend);

report::TrajectoryRollup to_rollup(const TrajectoryScore& score);

/// Reward export record: {"id","r_em","r_info_think","r_think_answer",
/// "total","format_valid"} plus the dataset tag for grouping.
nlohmann::ordered_json reward_record(const TrajectoryScore& score);

/// PairScore export record: {"trajectory_id","dimension","pair_index",
/// "label","provenance"}.
nlohmann::ordered_json pair_score_record(const metrics::PairScore& score);

/// Judge verdict record; label is null when unparseable.
nlohmann::ordered_json verdict_record(const judge::JudgeVerdict& verdict);

/// A zeroed reward record for a corpus line that never parsed; the id comes
/// from the sidecar.
nlohmann::ordered_json failed_reward_record(const datasetio::SidecarEntry& e);

}  // namespace veritas::scoring
