#pragma once

// Shared test utilities: randomized source construction with known expected
// outcomes, and independent brute-force oracles. Oracles here intentionally
// take different routes than the library (std::regex acceptor, quadratic
// scans) so the two can disagree when one is wrong.

#include <optional>
#include <random>
#include <regex>
#include <span>
#include <string>
#include <vector>

#include "veritas/metrics.hpp"
#include "veritas/trajectory.hpp"

namespace testutil {

using veritas::trajectory::BlockKind;

inline char kind_letter(BlockKind k) {
    switch (k) {
        case BlockKind::Think: return 'T';
        case BlockKind::Search: return 'S';
        case BlockKind::Information: return 'I';
        case BlockKind::Answer: return 'A';
    }
    return '?';
}

/// Independent acceptor for Think (Search Information Think)* Answer.
inline bool oracle_accepts(std::span<const BlockKind> kinds) {
    static const std::regex pattern("^T(SIT)*A$");
    std::string encoded;
    for (BlockKind k : kinds) encoded.push_back(kind_letter(k));
    return std::regex_match(encoded, pattern);
}

// ---------------------------------------------------------------------------
// Randomized source construction. Every generated case records the exact
// expected outcome: either a successful parse with known blocks, or the
// first error the parser must raise.
// ---------------------------------------------------------------------------

struct PlannedSource {
    std::string source;
    enum class Expect { Ok, UnclosedTag, NestedTag } expect = Expect::Ok;
    BlockKind error_tag = BlockKind::Think;  // for UnclosedTag
    size_t error_offset = 0;
    std::vector<BlockKind> kinds;          // for Ok
    std::vector<std::string> contents;     // for Ok
};

// Free text that never contains a known opening tag.
inline const std::vector<std::string>& filler_pieces() {
    static const std::vector<std::string> pieces = {
        "",
        " ",
        "\n",
        "Okay, ",
        "so the answer might be 42. ",
        "a < b and b > c ",
        "<note>unknown tags stay text</note> ",
        "<Think>wrong case is text</Think> ",
        "</search> stray closer ",
        "caf\xC3\xA9 \xE2\x88\x80x ",  // multi-byte UTF-8
        "ids: q-17, doc#3 ",
    };
    return pieces;
}

// Block payloads; none contain a known opening tag or any known closing tag.
inline const std::vector<std::string>& content_pieces() {
    static const std::vector<std::string> pieces = {
        "",
        " ",
        "the capital of France is Paris",
        "when did the war end?",
        "Doc 1: The Eiffel Tower (1889). ",
        "need more data\non line two",
        "   spaced   out   ",
        "x <tag y",
        "score=0.97",
    };
    return pieces;
}

inline std::string random_filler(std::mt19937& rng) {
    const auto& pieces = filler_pieces();
    return pieces[rng() % pieces.size()];
}

inline std::string random_content(std::mt19937& rng) {
    const auto& pieces = content_pieces();
    return pieces[rng() % pieces.size()];
}

inline BlockKind random_kind(std::mt19937& rng) {
    constexpr BlockKind kinds[] = {BlockKind::Think, BlockKind::Search,
                                   BlockKind::Information, BlockKind::Answer};
    return kinds[rng() % 4];
}

/// A random parseable or deliberately broken source. defect_rate in [0,100]
/// is the percent chance of injecting an unclosed or nested tag.
inline PlannedSource plan_source(std::mt19937& rng, int defect_rate = 0) {
    using veritas::trajectory::close_tag;
    using veritas::trajectory::open_tag;

    PlannedSource plan;
    const size_t block_count = rng() % 7;
    plan.source += random_filler(rng);
    for (size_t i = 0; i < block_count; ++i) {
        const BlockKind kind = random_kind(rng);
        const std::string content = random_content(rng);
        plan.kinds.push_back(kind);
        plan.contents.push_back(content);
        plan.source += open_tag(kind) + content + close_tag(kind);
        plan.source += random_filler(rng);
    }

    if (static_cast<int>(rng() % 100) < defect_rate) {
        const BlockKind kind = random_kind(rng);
        if (rng() % 2 == 0) {
            plan.expect = PlannedSource::Expect::UnclosedTag;
            plan.error_tag = kind;
            plan.error_offset = plan.source.size();
            plan.source += open_tag(kind) + random_content(rng);
        } else {
            plan.expect = PlannedSource::Expect::NestedTag;
            plan.source += open_tag(kind) + random_content(rng);
            const BlockKind inner = random_kind(rng);
            plan.error_offset = plan.source.size();
            plan.source += open_tag(inner) + random_content(rng);
            plan.source += close_tag(inner);
            plan.source += close_tag(kind);
        }
        plan.kinds.clear();
        plan.contents.clear();
    }
    return plan;
}

/// A random block-structured trajectory source from an explicit kind
/// sequence (always parseable).
inline std::string source_for_kinds(std::span<const BlockKind> kinds,
                                    std::mt19937& rng) {
    using veritas::trajectory::close_tag;
    using veritas::trajectory::open_tag;
    std::string source = random_filler(rng);
    for (BlockKind k : kinds) {
        source += open_tag(k) + random_content(rng) + close_tag(k);
        source += random_filler(rng);
    }
    return source;
}

// ---------------------------------------------------------------------------
// Quadratic pair-extraction oracle.
// ---------------------------------------------------------------------------

struct OraclePair {
    size_t premise_index;
    size_t conclusion_index;
    bool operator==(const OraclePair&) const = default;
};

inline std::vector<OraclePair> oracle_pairs(
    const veritas::trajectory::Trajectory& t,
    veritas::metrics::FaithDimension dimension) {
    using veritas::metrics::FaithDimension;
    const auto& blocks = t.blocks;
    std::vector<OraclePair> pairs;

    if (dimension == FaithDimension::ThinkSearch) {
        for (size_t j = 0; j < blocks.size(); ++j) {
            if (blocks[j].kind != BlockKind::Search) continue;
            for (size_t i = j; i-- > 0;) {
                if (blocks[i].kind == BlockKind::Think) {
                    pairs.push_back({i, j});
                    break;
                }
            }
        }
    } else if (dimension == FaithDimension::InfoThink) {
        for (size_t i = 0; i < blocks.size(); ++i) {
            if (blocks[i].kind != BlockKind::Information) continue;
            for (size_t j = i + 1; j < blocks.size(); ++j) {
                if (blocks[j].kind == BlockKind::Think) {
                    pairs.push_back({i, j});
                    break;
                }
            }
        }
    } else {
        std::optional<size_t> answer;
        for (size_t i = 0; i < blocks.size(); ++i) {
            if (blocks[i].kind == BlockKind::Answer) answer = i;
        }
        if (answer) {
            for (size_t i = *answer; i-- > 0;) {
                if (blocks[i].kind == BlockKind::Think) {
                    pairs.push_back({i, *answer});
                    break;
                }
            }
        }
    }
    return pairs;
}

/// Index of the block with this span start; blocks are span-sorted so this
/// recovers pair positions for oracle comparison.
inline size_t block_index_at(const veritas::trajectory::Trajectory& t,
                             size_t span_begin) {
    for (size_t i = 0; i < t.blocks.size(); ++i) {
        if (t.blocks[i].span.begin == span_begin) return i;
    }
    return t.blocks.size();
}

}  // namespace testutil
