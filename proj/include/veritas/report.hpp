#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

// Per-dataset aggregation of reward and faithfulness scores. Means are over
// trajectories with a defined score; undefined counts are surfaced so
// malformedness is never silently folded into unfaithfulness.

namespace veritas::report {

using json = nlohmann::ordered_json;

/// Per-trajectory input record for summarize: the reward outcome plus the
/// per-dimension aggregates (nullopt where the trajectory has no pairs).
struct TrajectoryRollup {
    std::string id;
    std::string dataset;
    int r_em = 0;
    bool format_valid = false;
    std::optional<double> info_think;
    std::optional<double> think_search;
    std::optional<int> think_answer;
};

struct DatasetSummary {
    std::string dataset;
    long long n = 0;
    std::optional<double> em_mean;
    std::optional<double> info_think_mean;
    std::optional<double> think_answer_mean;
    std::optional<double> think_search_mean;
    double format_valid_rate = 0.0;
    long long undefined_info_think = 0;
    long long undefined_think_answer = 0;
    long long undefined_think_search = 0;

    bool operator==(const DatasetSummary&) const = default;
};

/// One summary per distinct dataset tag, sorted by dataset name. Means
/// exclude undefined entries.
std::vector<DatasetSummary> summarize(std::span<const TrajectoryRollup> rollups);

enum class ReportFormat { Json, Csv, TextTable };

/// Render summaries.
///   csv:  fixed columns dataset,n,em,info_think,think_answer,think_search,
///         format_valid; undefined means are empty fields.
///   json: full DatasetSummary including undefined counts and the
///         zero-filled view of each mean.
///   text: aligned fixed-width table.
std::string emit(std::span<const DatasetSummary> summaries, ReportFormat format);

/// Parse emit()'s CSV back; emit(parse_csv(s), Csv) == s for canonical input.
std::vector<DatasetSummary> parse_csv(const std::string& text);

}  // namespace veritas::report
