#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "veritas/trajectory.hpp"

// Faithfulness pair extraction and the deterministic think-answer metric.
// Think-search and info-think labels come from a judge (see judge.hpp);
// think-answer is pure string containment over normalized text.

namespace veritas::metrics {

enum class FaithDimension { ThinkSearch, InfoThink, ThinkAnswer };

inline constexpr FaithDimension kAllDimensions[] = {
    FaithDimension::ThinkSearch, FaithDimension::InfoThink,
    FaithDimension::ThinkAnswer};

std::string_view dimension_name(FaithDimension d);
std::optional<FaithDimension> dimension_from_name(std::string_view name);

/// One (premise, conclusion) block pair for a faithfulness dimension.
/// pair_index is the 0-based ordinal among the trajectory's pairs of the
/// same dimension, in document order.
struct FaithfulnessPair {
    FaithDimension dimension;
    trajectory::Block premise;
    trajectory::Block conclusion;
    std::string trajectory_id;
    int pair_index = 0;
};

enum class Provenance { Regex, Judge };

std::string_view provenance_name(Provenance p);

struct PairScore {
    std::string trajectory_id;
    FaithDimension dimension;
    int pair_index = 0;
    int label = 0;  // 0 or 1
    Provenance provenance = Provenance::Regex;

    bool operator==(const PairScore&) const = default;
};

/// Extract pairs best-effort; blocks with no matching premise/conclusion
/// yield nothing.
///   ThinkSearch: each search paired with the nearest preceding think.
///   InfoThink:   each information paired with the nearest following think.
///   ThinkAnswer: the last answer paired with the latest preceding think.
std::vector<FaithfulnessPair> extract_pairs(const trajectory::Trajectory& t,
                                            FaithDimension d);

enum class MatchScope {
    LastThink,       // search only the latest think before the answer
    FullTrajectory,  // search all think content preceding the answer
};

struct ThinkAnswerOptions {
    MatchScope scope = MatchScope::LastThink;
};

/// Lowercase, collapse whitespace runs to single spaces, trim, and strip
/// punctuation from token edges. Shared by the think-answer match.
std::string normalize_for_match(std::string_view text);

/// Binary think-answer faithfulness: 1 iff the normalized answer text is a
/// substring of the normalized reasoning text. Returns nullopt when the
/// trajectory has no answer block or no think block preceding it.
std::optional<PairScore> think_answer_score(const trajectory::Trajectory& t,
                                            ThinkAnswerOptions options = {});

enum class AggregatePolicy { Mean, Min, All };

std::string_view aggregate_policy_name(AggregatePolicy p);
std::optional<AggregatePolicy> aggregate_policy_from_name(std::string_view name);

class MixedDimensionsError : public std::runtime_error {
public:
    MixedDimensionsError()
        : std::runtime_error("pair scores span multiple dimensions") {}
};

/// Fold per-pair labels into one fraction. Empty input is undefined, which
/// is distinct from 0.
std::optional<double> aggregate(std::span<const PairScore> scores,
                                AggregatePolicy policy);

}  // namespace veritas::metrics
