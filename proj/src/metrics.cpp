#include "veritas/metrics.hpp"

#include <algorithm>
#include <cctype>

namespace veritas::metrics {

using trajectory::Block;
using trajectory::BlockKind;
using trajectory::Trajectory;

std::string_view dimension_name(FaithDimension d) {
    switch (d) {
        case FaithDimension::ThinkSearch: return "think-search";
        case FaithDimension::InfoThink: return "info-think";
        case FaithDimension::ThinkAnswer: return "think-answer";
    }
    return "";
}

std::optional<FaithDimension> dimension_from_name(std::string_view name) {
    for (FaithDimension d : kAllDimensions) {
        if (dimension_name(d) == name) return d;
    }
    return std::nullopt;
}

std::string_view provenance_name(Provenance p) {
    return p == Provenance::Regex ? "regex" : "judge";
}

std::vector<FaithfulnessPair> extract_pairs(const Trajectory& t,
                                            FaithDimension d) {
    std::vector<FaithfulnessPair> pairs;
    const auto& blocks = t.blocks;
    auto add = [&](const Block& premise, const Block& conclusion) {
        pairs.push_back(FaithfulnessPair{d, premise, conclusion, t.id,
                                         static_cast<int>(pairs.size())});
    };

    switch (d) {
        case FaithDimension::ThinkSearch: {
            const Block* last_think = nullptr;
            for (const Block& b : blocks) {
                if (b.kind == BlockKind::Think) last_think = &b;
                else if (b.kind == BlockKind::Search && last_think)
                    add(*last_think, b);
            }
            break;
        }
        case FaithDimension::InfoThink: {
            for (size_t i = 0; i < blocks.size(); ++i) {
                if (blocks[i].kind != BlockKind::Information) continue;
                for (size_t j = i + 1; j < blocks.size(); ++j) {
                    if (blocks[j].kind == BlockKind::Think) {
                        add(blocks[i], blocks[j]);
                        break;
                    }
                }
            }
            break;
        }
        case FaithDimension::ThinkAnswer: {
            const Block* answer = t.last_of(BlockKind::Answer);
            if (!answer) break;
            const Block* premise = nullptr;
            for (const Block& b : blocks) {
                if (&b == answer) break;
                if (b.kind == BlockKind::Think && b.span.begin < answer->span.begin)
                    premise = &b;
            }
            if (premise) add(*premise, *answer);
            break;
        }
    }
    return pairs;
}

std::string normalize_for_match(std::string_view text) {
    // Tokenize on whitespace, strip punctuation from token edges, lowercase,
    // re-join with single spaces.
    std::string out;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        size_t j = i;
        while (j < n && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        if (j > i) {
            size_t b = i, e = j;
            while (b < e && std::ispunct(static_cast<unsigned char>(text[b]))) ++b;
            while (e > b && std::ispunct(static_cast<unsigned char>(text[e - 1]))) --e;
            if (e > b) {
                if (!out.empty()) out.push_back(' ');
                for (size_t k = b; k < e; ++k) {
                    out.push_back(static_cast<char>(
                        std::tolower(static_cast<unsigned char>(text[k]))));
                }
            }
        }
        i = j;
    }
    return out;
}

std::optional<PairScore> think_answer_score(const Trajectory& t,
                                            ThinkAnswerOptions options) {
    auto pairs = extract_pairs(t, FaithDimension::ThinkAnswer);
    if (pairs.empty()) return std::nullopt;  // missing answer or missing think
    const FaithfulnessPair& pair = pairs.front();

    std::string haystack;
    if (options.scope == MatchScope::LastThink) {
        haystack = pair.premise.content;
    } else {
        for (const Block& b : t.blocks) {
            if (b.span.begin >= pair.conclusion.span.begin) break;
            if (b.kind == BlockKind::Think) {
                if (!haystack.empty()) haystack.push_back('\n');
                haystack += b.content;
            }
        }
    }

    const std::string needle = normalize_for_match(pair.conclusion.content);
    const std::string body = normalize_for_match(haystack);
    // After whitespace collapsing, the escaped-pattern-with-\s+ match from the
    // metric definition reduces to plain substring search.
    const bool hit = !needle.empty() && body.find(needle) != std::string::npos;

    return PairScore{t.id, FaithDimension::ThinkAnswer, pair.pair_index,
                     hit ? 1 : 0, Provenance::Regex};
}

std::string_view aggregate_policy_name(AggregatePolicy p) {
    switch (p) {
        case AggregatePolicy::Mean: return "mean";
        case AggregatePolicy::Min: return "min";
        case AggregatePolicy::All: return "all";
    }
    return "";
}

std::optional<AggregatePolicy> aggregate_policy_from_name(
    std::string_view name) {
    if (name == "mean") return AggregatePolicy::Mean;
    if (name == "min") return AggregatePolicy::Min;
    if (name == "all") return AggregatePolicy::All;
    return std::nullopt;
}

std::optional<double> aggregate(std::span<const PairScore> scores,
                                AggregatePolicy policy) {
    if (scores.empty()) return std::nullopt;
    for (const PairScore& s : scores) {
        if (s.dimension != scores.front().dimension) throw MixedDimensionsError();
    }
    switch (policy) {
        case AggregatePolicy::Mean: {
            double sum = 0;
            for (const PairScore& s : scores) sum += s.label;
            return sum / static_cast<double>(scores.size());
        }
        case AggregatePolicy::Min: {
            int min = 1;
            for (const PairScore& s : scores) min = std::min(min, s.label);
            return static_cast<double>(min);
        }
        case AggregatePolicy::All: {
            for (const PairScore& s : scores) {
                if (s.label != 1) return 0.0;
            }
            return 1.0;
        }
    }
    return std::nullopt;
}

}  // namespace veritas::metrics
