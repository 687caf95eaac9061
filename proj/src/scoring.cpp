#include "veritas/scoring.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace veritas::scoring {

using metrics::FaithDimension;

TrajectoryScore score_entry(const datasetio::CorpusEntry& entry,
                            const ScoreOptions& options,
                            judge::JudgeBackend& backend) {
    const trajectory::Trajectory& t = entry.traj;
    TrajectoryScore score;
    score.id = t.id;
    score.dataset = entry.dataset;
    score.verdict = trajectory::check_format(t);

    // Judged dimensions: think-search and info-think. Judge calls within one
    // trajectory stay sequential; the batch drivers parallelize across
    // trajectories.
    judge::JudgeBatchOptions judge_options{options.judge_max_attempts, 1};
    for (FaithDimension dim :
         {FaithDimension::ThinkSearch, FaithDimension::InfoThink}) {
        auto pairs = metrics::extract_pairs(t, dim);
        auto verdicts = judge::judge_pairs(pairs, backend, judge_options);

        std::vector<metrics::PairScore> labels;
        labels.reserve(verdicts.size());
        for (const auto& v : verdicts) {
            // Unparseable verdicts earn no faithfulness credit: they count
            // as 0 toward the trajectory aggregate but are exported as raw
            // verdicts, not as pair scores.
            labels.push_back(metrics::PairScore{
                v.pair_ref.trajectory_id, dim, v.pair_ref.pair_index,
                v.label.value_or(0), metrics::Provenance::Judge});
            if (v.label.has_value()) score.pair_scores.push_back(labels.back());
            score.judge_verdicts.push_back(v);
        }
        auto aggregate = metrics::aggregate(labels, options.aggregation);
        if (dim == FaithDimension::ThinkSearch) score.think_search = aggregate;
        else score.info_think = aggregate;
    }

    auto think_answer = metrics::think_answer_score(
        t, metrics::ThinkAnswerOptions{options.match_scope});
    if (think_answer) {
        score.think_answer = think_answer->label;
        score.pair_scores.push_back(*think_answer);
    }

    score.breakdown =
        reward::combined_reward(t, options.weights, score.info_think,
                                score.think_answer, options.em_normalization);
    return score;
}

std::vector<TrajectoryScore> score_corpus_serial(
    std::span<const datasetio::CorpusEntry> entries,
    const ScoreOptions& options, judge::JudgeBackend& backend) {
    std::vector<TrajectoryScore> scores;
    scores.reserve(entries.size());
    for (const auto& entry : entries) {
        scores.push_back(score_entry(entry, options, backend));
    }
    return scores;
}

std::vector<TrajectoryScore> score_corpus_parallel(
    std::span<const datasetio::CorpusEntry> entries,
    const ScoreOptions& options, judge::JudgeBackend& backend) {
#ifdef _OPENMP
    std::vector<TrajectoryScore> scores(entries.size());
    const int threads = std::max(1, options.parallelism);
    const auto n = static_cast<long long>(entries.size());
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long long i = 0; i < n; ++i) {
        scores[static_cast<size_t>(i)] =
            score_entry(entries[static_cast<size_t>(i)], options, backend);
    }
    return scores;
#else
    return score_corpus_serial(entries, options, backend);
#endif
}

std::vector<TrajectoryScore> score_corpus(
    std::span<const datasetio::CorpusEntry> entries,
    const ScoreOptions& options, judge::JudgeBackend& backend) {
    if (options.parallelism <= 1) {
        return score_corpus_serial(entries, options, backend);
    }
    return score_corpus_parallel(entries, options, backend);
}

report::TrajectoryRollup to_rollup(const TrajectoryScore& score) {
    report::TrajectoryRollup rollup;
    rollup.id = score.id;
    rollup.dataset = score.dataset;
    rollup.r_em = score.breakdown.r_em;
    rollup.format_valid = score.breakdown.format_valid;
    rollup.info_think = score.info_think;
    rollup.think_search = score.think_search;
    rollup.think_answer = score.think_answer;
    return rollup;
}

nlohmann::ordered_json reward_record(const TrajectoryScore& score) {
    const reward::RewardBreakdown& b = score.breakdown;
    return nlohmann::ordered_json{
        {"id", score.id},          {"r_em", b.r_em},
        {"r_info_think", b.r_info_think}, {"r_think_answer", b.r_think_answer},
        {"total", b.total},        {"format_valid", b.format_valid},
        {"dataset", score.dataset}};
}

nlohmann::ordered_json pair_score_record(const metrics::PairScore& score) {
    return nlohmann::ordered_json{
        {"trajectory_id", score.trajectory_id},
        {"dimension", metrics::dimension_name(score.dimension)},
        {"pair_index", score.pair_index},
        {"label", score.label},
        {"provenance", metrics::provenance_name(score.provenance)}};
}

nlohmann::ordered_json verdict_record(const judge::JudgeVerdict& verdict) {
    nlohmann::ordered_json record{
        {"trajectory_id", verdict.pair_ref.trajectory_id},
        {"dimension", metrics::dimension_name(verdict.pair_ref.dimension)},
        {"pair_index", verdict.pair_ref.pair_index},
        {"label", verdict.label ? nlohmann::ordered_json(*verdict.label)
                                : nlohmann::ordered_json(nullptr)},
        {"provenance", "judge"},
        {"raw", verdict.raw},
        {"backend", verdict.backend}};
    return record;
}

nlohmann::ordered_json failed_reward_record(const datasetio::SidecarEntry& e) {
    return nlohmann::ordered_json{
        {"id", e.id},     {"r_em", 0},       {"r_info_think", 0.0},
        {"r_think_answer", 0}, {"total", 0.0}, {"format_valid", false},
        {"dataset", e.dataset}};
}

}  // namespace veritas::scoring
