#include "veritas/trajectory.hpp"

#include <algorithm>
#include <array>
#include <sstream>

namespace veritas::trajectory {

std::string_view tag_name(BlockKind kind) {
    switch (kind) {
        case BlockKind::Think: return "think";
        case BlockKind::Search: return "search";
        case BlockKind::Information: return "information";
        case BlockKind::Answer: return "answer";
    }
    return "";
}

std::string open_tag(BlockKind kind) {
    return "<" + std::string(tag_name(kind)) + ">";
}

std::string close_tag(BlockKind kind) {
    return "</" + std::string(tag_name(kind)) + ">";
}

std::optional<BlockKind> kind_from_name(std::string_view name) {
    for (BlockKind k : kAllKinds) {
        if (tag_name(k) == name) return k;
    }
    return std::nullopt;
}

const Block* Trajectory::last_of(BlockKind kind) const {
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
        if (it->kind == kind) return &*it;
    }
    return nullptr;
}

std::vector<BlockKind> Trajectory::kinds() const {
    std::vector<BlockKind> out;
    out.reserve(blocks.size());
    for (const Block& b : blocks) out.push_back(b.kind);
    return out;
}

namespace {

std::string describe(ParseErrorKind kind, std::optional<BlockKind> tag,
                     size_t offset) {
    std::ostringstream os;
    if (kind == ParseErrorKind::UnclosedTag) {
        os << "unclosed <" << (tag ? tag_name(*tag) : "?") << "> at offset "
           << offset;
    } else {
        os << "nested ";
        if (tag) os << "<" << tag_name(*tag) << "> ";
        os << "tag at offset " << offset;
    }
    return os.str();
}

// Earliest known opening tag at or after `from`, with its kind.
struct TagHit {
    size_t pos;
    BlockKind kind;
};

std::optional<TagHit> find_open_tag(std::string_view source, size_t from) {
    std::optional<TagHit> best;
    for (BlockKind k : kAllKinds) {
        const std::string tag = open_tag(k);
        size_t pos = source.find(tag, from);
        if (pos != std::string_view::npos && (!best || pos < best->pos)) {
            best = TagHit{pos, k};
        }
    }
    return best;
}

}  // namespace

ParseError::ParseError(ParseErrorKind kind, std::optional<BlockKind> tag,
                       size_t offset)
    : std::runtime_error(describe(kind, tag, offset)),
      kind_(kind),
      tag_(tag),
      offset_(offset) {}

Trajectory parse(std::string source, std::string id, std::string question,
                 std::vector<std::string> golden_answers) {
    Trajectory t;
    t.id = std::move(id);
    t.question = std::move(question);
    t.golden_answers = std::move(golden_answers);
    t.source = std::move(source);

    std::string_view src = t.source;
    size_t pos = 0;
    while (pos < src.size()) {
        auto open = find_open_tag(src, pos);
        if (!open) break;

        const BlockKind kind = open->kind;
        const size_t content_begin = open->pos + open_tag(kind).size();
        const size_t close_at = src.find(close_tag(kind), content_begin);
        const auto inner_open = find_open_tag(src, content_begin);

        // A known opening tag before our closing tag means the block nests,
        // which the grammar forbids.
        if (inner_open &&
            (close_at == std::string_view::npos || inner_open->pos < close_at)) {
            throw ParseError(ParseErrorKind::NestedTag, inner_open->kind,
                             inner_open->pos);
        }
        if (close_at == std::string_view::npos) {
            throw ParseError(ParseErrorKind::UnclosedTag, kind, open->pos);
        }

        Block b;
        b.kind = kind;
        b.content = std::string(src.substr(content_begin, close_at - content_begin));
        b.span = Span{open->pos, close_at + close_tag(kind).size()};
        t.blocks.push_back(std::move(b));
        pos = t.blocks.back().span.end;
    }
    return t;
}

std::string_view violation_name(FormatViolation v) {
    switch (v) {
        case FormatViolation::MissingAnswer: return "missing-answer";
        case FormatViolation::SearchWithoutInformation:
            return "search-without-information";
        case FormatViolation::LeadingNonThink: return "leading-non-think";
        case FormatViolation::InterleaveError: return "interleave-error";
        case FormatViolation::UnclosedTag: return "unclosed-tag";
    }
    return "";
}

bool grammar_accepts(std::span<const BlockKind> kinds) {
    const size_t n = kinds.size();
    if (n < 2 || kinds[0] != BlockKind::Think) return false;
    size_t i = 1;
    while (i < n && kinds[i] == BlockKind::Search) {
        if (i + 2 >= n || kinds[i + 1] != BlockKind::Information ||
            kinds[i + 2] != BlockKind::Think) {
            return false;
        }
        i += 3;
    }
    return i == n - 1 && kinds[i] == BlockKind::Answer;
}

FormatVerdict check_kinds(std::span<const BlockKind> kinds) {
    FormatVerdict verdict;

    if (!kinds.empty() && kinds[0] != BlockKind::Think) {
        verdict.violations.push_back(FormatViolation::LeadingNonThink);
    }
    if (std::none_of(kinds.begin(), kinds.end(),
                     [](BlockKind k) { return k == BlockKind::Answer; })) {
        verdict.violations.push_back(FormatViolation::MissingAnswer);
    }
    for (size_t i = 0; i < kinds.size(); ++i) {
        if (kinds[i] == BlockKind::Search &&
            (i + 1 >= kinds.size() || kinds[i + 1] != BlockKind::Information)) {
            verdict.violations.push_back(FormatViolation::SearchWithoutInformation);
            break;
        }
    }
    // Anything still wrong is an ordering problem: answer not last, duplicate
    // answers, think/information out of position.
    if (verdict.violations.empty() && !grammar_accepts(kinds)) {
        verdict.violations.push_back(FormatViolation::InterleaveError);
    }
    verdict.valid = verdict.violations.empty();
    return verdict;
}

FormatVerdict check_format(const Trajectory& t) {
    auto kinds = t.kinds();
    return check_kinds(kinds);
}

FormatVerdict parse_failure_verdict(const ParseError& err) {
    FormatVerdict verdict;
    verdict.valid = false;
    verdict.violations.push_back(FormatViolation::UnclosedTag);
    verdict.detail = err.what();
    return verdict;
}

std::vector<MaskSegment> retrieval_mask(const Trajectory& t,
                                        MaskOptions options) {
    const size_t len = t.source.size();
    std::vector<Span> retrieved;
    for (const Block& b : t.blocks) {
        if (b.kind != BlockKind::Information) continue;
        Span region = b.span;
        if (!options.include_tags) {
            region.begin += open_tag(b.kind).size();
            region.end -= close_tag(b.kind).size();
        }
        if (region.begin < region.end) retrieved.push_back(region);
    }

    std::vector<MaskSegment> segments;
    auto emit = [&](Span span, bool flag) {
        if (span.begin >= span.end) return;
        if (!segments.empty() && segments.back().retrieved == flag) {
            segments.back().span.end = span.end;
        } else {
            segments.push_back(MaskSegment{span, flag});
        }
    };

    size_t cursor = 0;
    for (const Span& r : retrieved) {
        emit(Span{cursor, r.begin}, false);
        emit(r, true);
        cursor = r.end;
    }
    emit(Span{cursor, len}, false);
    return segments;
}

}  // namespace veritas::trajectory
