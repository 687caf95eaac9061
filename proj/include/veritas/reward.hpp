#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "veritas/trajectory.hpp"

// Outcome reward (exact match) and the combined process reward:
//   total = w_em * r_em + w_info_think * r_info_think
//         + w_think_answer * r_think_answer
// plus an optional additive format bonus (default weight 0).

namespace veritas::reward {

struct RewardWeights {
    double em = 0.9;
    double info_think = 0.05;
    double think_answer = 0.02;
    double format_bonus = 0.0;  // extrapolated extra term, off by default

    bool operator==(const RewardWeights&) const = default;
};

bool weights_valid(const RewardWeights& w);

/// Named presets: "veritas" (0.9/0.05/0.02), "em-only" (1/0/0),
/// "em-info-think" (0.9/0.05/0), "em-think-answer" (0.9/0/0.02).
std::optional<RewardWeights> weights_preset(std::string_view name);

class InvalidWeightsError : public std::runtime_error {
public:
    InvalidWeightsError()
        : std::runtime_error(
              "reward weights must be >= 0 with at least one > 0") {}
};

class EmptyGoldSetError : public std::runtime_error {
public:
    EmptyGoldSetError() : std::runtime_error("golden answer set is empty") {}
};

enum class EmNormalization {
    Standard,  // lowercase, drop articles, drop punctuation, collapse spaces
    Identity,
};

std::string normalize_em(std::string_view text,
                         EmNormalization mode = EmNormalization::Standard);

/// 1 iff the normalized prediction equals some normalized golden answer.
int exact_match(std::string_view predicted,
                std::span<const std::string> golden_answers,
                EmNormalization mode = EmNormalization::Standard);

struct RewardBreakdown {
    std::string trajectory_id;
    int r_em = 0;
    double r_info_think = 0.0;
    int r_think_answer = 0;
    double total = 0.0;
    bool format_valid = false;

    bool operator==(const RewardBreakdown&) const = default;
};

double weighted_total(const RewardWeights& w, int r_em, double r_info_think,
                      int r_think_answer, bool format_valid);

/// Combine the outcome reward with the faithfulness components. Undefined
/// components (no pairs, malformed trajectory) are coerced to 0; a missing
/// answer block or empty gold set gives r_em = 0 rather than an error so
/// batch scoring never aborts on one rollout.
RewardBreakdown combined_reward(
    const trajectory::Trajectory& t, const RewardWeights& weights,
    std::optional<double> info_think, std::optional<int> think_answer,
    EmNormalization mode = EmNormalization::Standard);

}  // namespace veritas::reward
