#include "veritas/reward.hpp"

#include <cctype>

namespace veritas::reward {

bool weights_valid(const RewardWeights& w) {
    if (w.em < 0 || w.info_think < 0 || w.think_answer < 0 ||
        w.format_bonus < 0) {
        return false;
    }
    return w.em > 0 || w.info_think > 0 || w.think_answer > 0 ||
           w.format_bonus > 0;
}

std::optional<RewardWeights> weights_preset(std::string_view name) {
    if (name == "veritas" || name == "paper") {
        return RewardWeights{0.9, 0.05, 0.02, 0.0};
    }
    if (name == "em-only") return RewardWeights{1.0, 0.0, 0.0, 0.0};
    if (name == "em-info-think") return RewardWeights{0.9, 0.05, 0.0, 0.0};
    if (name == "em-think-answer") return RewardWeights{0.9, 0.0, 0.02, 0.0};
    return std::nullopt;
}

namespace {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

// Blank out standalone "a", "an", "the" (word-boundary semantics, already
// lowercased input).
void blank_articles(std::string& s) {
    static constexpr std::string_view articles[] = {"a", "an", "the"};
    for (std::string_view article : articles) {
        size_t pos = 0;
        while ((pos = s.find(article, pos)) != std::string::npos) {
            const bool left_ok = pos == 0 || !is_word_char(s[pos - 1]);
            const size_t end = pos + article.size();
            const bool right_ok = end == s.size() || !is_word_char(s[end]);
            if (left_ok && right_ok) {
                for (size_t i = pos; i < end; ++i) s[i] = ' ';
            }
            pos = end;
        }
    }
}

}  // namespace

std::string normalize_em(std::string_view text, EmNormalization mode) {
    if (mode == EmNormalization::Identity) return std::string(text);

    std::string s;
    s.reserve(text.size());
    for (char c : text) {
        s.push_back(
            static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    blank_articles(s);

    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (std::ispunct(static_cast<unsigned char>(c))) continue;
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(c);
    }
    return out;
}

int exact_match(std::string_view predicted,
                std::span<const std::string> golden_answers,
                EmNormalization mode) {
    if (golden_answers.empty()) throw EmptyGoldSetError();
    const std::string norm_pred = normalize_em(predicted, mode);
    for (const std::string& gold : golden_answers) {
        if (normalize_em(gold, mode) == norm_pred) return 1;
    }
    return 0;
}

double weighted_total(const RewardWeights& w, int r_em, double r_info_think,
                      int r_think_answer, bool format_valid) {
    double total = w.em * r_em + w.info_think * r_info_think +
                   w.think_answer * r_think_answer;
    if (format_valid) total += w.format_bonus;
    return total;
}

RewardBreakdown combined_reward(const trajectory::Trajectory& t,
                                const RewardWeights& weights,
                                std::optional<double> info_think,
                                std::optional<int> think_answer,
                                EmNormalization mode) {
    if (!weights_valid(weights)) throw InvalidWeightsError();

    RewardBreakdown out;
    out.trajectory_id = t.id;

    const trajectory::Block* answer =
        t.last_of(trajectory::BlockKind::Answer);
    if (answer && !t.golden_answers.empty()) {
        out.r_em = exact_match(answer->content, t.golden_answers, mode);
    }
    out.r_info_think = info_think.value_or(0.0);
    out.r_think_answer = think_answer.value_or(0);
    out.format_valid = trajectory::check_format(t).valid;
    out.total = weighted_total(weights, out.r_em, out.r_info_think,
                               out.r_think_answer, out.format_valid);
    return out;
}

}  // namespace veritas::reward
