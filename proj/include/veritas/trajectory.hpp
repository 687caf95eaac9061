#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Block structure of an agentic-search rollout: free text interleaved with
// <think>, <search>, <information> and <answer> regions. Parsing is lossless;
// every byte of the source is covered either by a block span or by the text
// between spans.

namespace veritas::trajectory {

enum class BlockKind { Think, Search, Information, Answer };

inline constexpr BlockKind kAllKinds[] = {
    BlockKind::Think, BlockKind::Search, BlockKind::Information,
    BlockKind::Answer};

std::string_view tag_name(BlockKind kind);
std::string open_tag(BlockKind kind);
std::string close_tag(BlockKind kind);
std::optional<BlockKind> kind_from_name(std::string_view name);

/// Half-open byte range [begin, end) into a source string.
struct Span {
    size_t begin = 0;
    size_t end = 0;

    size_t length() const { return end - begin; }
    bool operator==(const Span&) const = default;
};

struct Block {
    BlockKind kind;
    std::string content;  // text strictly between the tags, whitespace as found
    Span span;            // full tagged region, tags included

    bool operator==(const Block&) const = default;
};

struct Trajectory {
    std::string id;
    std::string question;
    std::vector<std::string> golden_answers;
    std::string source;
    std::vector<Block> blocks;  // document order, spans disjoint

    /// Last block of the given kind, or nullptr.
    const Block* last_of(BlockKind kind) const;
    std::vector<BlockKind> kinds() const;
};

enum class ParseErrorKind { UnclosedTag, NestedTag };

class ParseError : public std::runtime_error {
public:
    ParseError(ParseErrorKind kind, std::optional<BlockKind> tag, size_t offset);

    ParseErrorKind kind() const { return kind_; }
    std::optional<BlockKind> tag() const { return tag_; }
    size_t offset() const { return offset_; }

private:
    ParseErrorKind kind_;
    std::optional<BlockKind> tag_;
    size_t offset_;
};

/// Parse a raw rollout into its block structure.
///
/// Only the four known tags, matched case-sensitively, open blocks; anything
/// else (unknown tags, stray closing tags) is plain text. Throws ParseError
/// when an opening tag is never closed or when a known opening tag appears
/// inside an already open block.
Trajectory parse(std::string source, std::string id = {},
                 std::string question = {},
                 std::vector<std::string> golden_answers = {});

enum class FormatViolation {
    MissingAnswer,
    SearchWithoutInformation,
    LeadingNonThink,
    InterleaveError,
    UnclosedTag,
};

std::string_view violation_name(FormatViolation v);

struct FormatVerdict {
    bool valid = false;
    std::vector<FormatViolation> violations;
    std::string detail;  // human-readable context, set for parse failures

    bool operator==(const FormatVerdict& o) const {
        return valid == o.valid && violations == o.violations;
    }
};

/// True iff the kind sequence matches Think (Search Information Think)* Answer.
bool grammar_accepts(std::span<const BlockKind> kinds);

/// Grammar check over a bare kind sequence. valid is true iff violations
/// is empty.
FormatVerdict check_kinds(std::span<const BlockKind> kinds);

FormatVerdict check_format(const Trajectory& t);

/// Verdict for a source that failed to parse; used by corpus validation,
/// never produced by check_format itself.
FormatVerdict parse_failure_verdict(const ParseError& err);

struct MaskSegment {
    Span span;
    bool retrieved;  // true only over information-block content

    bool operator==(const MaskSegment&) const = default;
};

struct MaskOptions {
    // When set, the <information> tags themselves count as retrieved text,
    // not just their interior.
    bool include_tags = false;
};

/// Partition the source into alternating retrieved / model-generated
/// segments. Segments are contiguous, non-empty, and cover [0, source.size()).
std::vector<MaskSegment> retrieval_mask(const Trajectory& t,
                                        MaskOptions options = {});

}  // namespace veritas::trajectory
