// Acceptance suite: one named criterion per test case, each printing a
// single PASS/FAIL line with its scale and elapsed time.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "veritas/agreement.hpp"
#include "veritas/datasetio.hpp"
#include "veritas/judge.hpp"
#include "veritas/metrics.hpp"
#include "veritas/reward.hpp"
#include "veritas/trajectory.hpp"

namespace fs = std::filesystem;
using namespace veritas;
using trajectory::BlockKind;

namespace {

class Criterion {
public:
    explicit Criterion(std::string name) : name_(std::move(name)) {}

    void fail(const std::string& why) {
        ok_ = false;
        if (detail_.empty()) detail_ = why;
    }
    bool ok() const { return ok_; }

    // Prints the one-line verdict and asserts, so ctest fails too.
    void finish(const std::string& scale) {
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          start_)
                .count();
        std::printf("[%s] %-24s %s (%.2fs)%s%s\n", ok_ ? "PASS" : "FAIL",
                    name_.c_str(), scale.c_str(), elapsed,
                    ok_ ? "" : " -- ", detail_.c_str());
        std::fflush(stdout);
        CHECK_MESSAGE(ok_, name_, ": ", detail_);
    }

private:
    std::string name_;
    std::string detail_;
    bool ok_ = true;
    std::chrono::steady_clock::time_point start_ =
        std::chrono::steady_clock::now();
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("parser round-trip") {
    Criterion criterion("parser-round-trip");
    std::mt19937 rng(20260808);
    int parsed = 0, rejected = 0;
    for (int i = 0; i < 200; ++i) {
        auto plan = testutil::plan_source(rng, 40);
        try {
            auto t = trajectory::parse(plan.source);
            if (plan.expect != testutil::PlannedSource::Expect::Ok) {
                criterion.fail("case " + std::to_string(i) +
                               ": expected a parse error");
                continue;
            }
            ++parsed;
            if (t.kinds() != plan.kinds) criterion.fail("block kinds differ");
            std::string rebuilt;
            size_t cursor = 0;
            for (const auto& b : t.blocks) {
                rebuilt += plan.source.substr(cursor, b.span.begin - cursor);
                rebuilt += trajectory::open_tag(b.kind) + b.content +
                           trajectory::close_tag(b.kind);
                cursor = b.span.end;
            }
            rebuilt += plan.source.substr(cursor);
            if (rebuilt != plan.source) {
                criterion.fail("case " + std::to_string(i) +
                               ": reconstruction differs");
            }
        } catch (const trajectory::ParseError& e) {
            ++rejected;
            using Expect = testutil::PlannedSource::Expect;
            if (plan.expect == Expect::Ok) {
                criterion.fail("case " + std::to_string(i) +
                               ": unexpected error " + e.what());
            } else if (plan.expect == Expect::UnclosedTag) {
                if (e.kind() != trajectory::ParseErrorKind::UnclosedTag ||
                    e.tag() != plan.error_tag ||
                    e.offset() != plan.error_offset) {
                    criterion.fail("case " + std::to_string(i) +
                                   ": wrong unclosed-tag report");
                }
            } else {
                if (e.kind() != trajectory::ParseErrorKind::NestedTag ||
                    e.offset() != plan.error_offset) {
                    criterion.fail("case " + std::to_string(i) +
                                   ": wrong nested-tag report");
                }
            }
        }
    }
    criterion.finish("200 generated cases (" + std::to_string(parsed) +
                     " parsed, " + std::to_string(rejected) + " rejected)");
}

TEST_CASE("grammar oracle") {
    Criterion criterion("grammar-oracle");
    long long checked = 0;
    for (size_t len = 0; len <= 9; ++len) {
        std::vector<BlockKind> kinds(len, BlockKind::Think);
        std::vector<int> digits(len, 0);
        while (true) {
            for (size_t i = 0; i < len; ++i) {
                kinds[i] = trajectory::kAllKinds[digits[i]];
            }
            const auto verdict = trajectory::check_kinds(kinds);
            const bool expected = testutil::oracle_accepts(kinds);
            if (verdict.valid != expected ||
                verdict.valid != verdict.violations.empty()) {
                std::string seq;
                for (BlockKind k : kinds) seq += testutil::kind_letter(k);
                criterion.fail("disagreement on \"" + seq + "\"");
            }
            ++checked;
            // Next base-4 string of this length.
            size_t pos = 0;
            while (pos < len && ++digits[pos] == 4) digits[pos++] = 0;
            if (pos == len) break;
        }
    }
    // check_format itself is the same decision over parsed blocks; spot-check
    // the bridge on parsed trajectories.
    std::mt19937 rng(42);
    for (int i = 0; i < 200; ++i) {
        const size_t len = rng() % 10;
        std::vector<BlockKind> kinds;
        for (size_t k = 0; k < len; ++k) kinds.push_back(testutil::random_kind(rng));
        auto t = trajectory::parse(testutil::source_for_kinds(kinds, rng));
        if (trajectory::check_format(t).valid != testutil::oracle_accepts(kinds)) {
            criterion.fail("check_format bridge disagreement");
        }
    }
    criterion.finish(std::to_string(checked) + " kind sequences of length <= 9");
}

TEST_CASE("pair extraction oracle") {
    Criterion criterion("pair-extraction-oracle");
    std::mt19937 rng(77);
    int trajectories = 0, pairs_checked = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const size_t len = rng() % 12;
        std::vector<BlockKind> kinds;
        for (size_t k = 0; k < len; ++k) kinds.push_back(testutil::random_kind(rng));
        auto t = trajectory::parse(testutil::source_for_kinds(kinds, rng), "t");
        ++trajectories;
        for (auto dim : metrics::kAllDimensions) {
            auto expected = testutil::oracle_pairs(t, dim);
            auto actual = metrics::extract_pairs(t, dim);
            if (actual.size() != expected.size()) {
                criterion.fail("pair count mismatch");
                continue;
            }
            for (size_t i = 0; i < actual.size(); ++i) {
                ++pairs_checked;
                if (testutil::block_index_at(t, actual[i].premise.span.begin) !=
                        expected[i].premise_index ||
                    testutil::block_index_at(t, actual[i].conclusion.span.begin) !=
                        expected[i].conclusion_index) {
                    criterion.fail("pair block mismatch");
                }
            }
        }
    }
    criterion.finish(std::to_string(trajectories) + " trajectories, " +
                     std::to_string(pairs_checked) + " pairs, 3 dimensions");
}

TEST_CASE("think-answer metric fixtures") {
    Criterion criterion("think-answer-fixtures");
    struct Case {
        const char* think;
        const char* answer;
        int label;
    };
    // Hand-labeled by applying the normalization rules (lowercase, collapse
    // whitespace, strip token-edge punctuation) and substring containment.
    const Case cases[] = {
        {"the capital is Paris", "Paris", 1},
        {"The answer is 42.", "42", 1},
        {"the answer is 42.", "43", 0},
        {"answer:  New   York\nCity", "new york city", 1},
        {"NEW YORK CITY is big", "new york city", 1},
        {"new-york city", "new york city", 0},
        {"I think 'Paris' fits", "paris", 1},
        {"Paris.", "paris", 1},
        {"comparison of items", "paris", 1},  // substring, no word boundary
        {"the total was one hundred", "one hundred", 1},
        {"total: one  hundred", "one hundred", 1},
        {"onehundred total", "one hundred", 0},
        {"it is \"Mount Everest\"!", "mount everest", 1},
        {"height of K2 is 8611m", "8611", 1},
        {"the war ended in 1945", "1945", 1},
        {"the war ended in 1945", "1944", 0},
        {"answer is   forty   two", "forty two", 1},
        {"answer is forty-two", "forty two", 0},
        {"Washington, D.C. hosts congress", "washington", 1},
        {"university of washington dc", "washington", 1},
        {"", "anything", 0},
        {"the answer", "", 0},
        {"answer: don't panic", "don't panic", 1},
        {"answer: dont panic", "don't panic", 0},
        {"Die Hauptstadt ist Berlin", "berlin", 1},
        {"caf\xC3\xA9 au lait", "caf\xC3\xA9", 1},
        {"CAF\xC3\x89 time", "caf\xC3\xA9", 0},  // byte-level casefold is ASCII-only
        {"sum equals 100", "10", 1},
        {"upper- and lowercase", "and lowercase", 1},
        {"the price is $5.99 today", "5.99", 1},
    };
    int index = 0;
    for (const Case& c : cases) {
        auto t = trajectory::parse("<think>" + std::string(c.think) +
                                   "</think><answer>" + c.answer + "</answer>");
        auto score = metrics::think_answer_score(t);
        if (!score || score->label != c.label) {
            criterion.fail("case " + std::to_string(index) + " (\"" +
                           c.answer + "\"): expected " +
                           std::to_string(c.label));
        }
        ++index;
    }
    criterion.finish(std::to_string(index) + " hand-labeled cases");
}

TEST_CASE("combined reward arithmetic") {
    Criterion criterion("eq1-arithmetic");
    const reward::RewardWeights paper = *reward::weights_preset("veritas");
    struct Case {
        int em;
        double info_think;
        int think_answer;
        double expected;  // hand-computed 0.9*em + 0.05*it + 0.02*ta
    };
    const Case cases[] = {
        {1, 1.0, 1, 0.97},    {0, 0.0, 0, 0.0},
        {1, 0.0, 0, 0.9},     {0, 1.0, 0, 0.05},
        {0, 0.0, 1, 0.02},    {1, 0.8, 1, 0.96},
        {1, 0.5, 0, 0.925},   {0, 0.5, 1, 0.045},
        {1, 0.25, 1, 0.9325}, {0, 0.75, 0, 0.0375},
        {1, 1.0, 0, 0.95},    {0, 1.0, 1, 0.07},
        {1, 0.0, 1, 0.92},    {0, 0.25, 0, 0.0125},
        {1, 0.6, 0, 0.93},    {0, 0.6, 1, 0.05},
        {1, 0.9, 1, 0.965},   {0, 0.1, 0, 0.005},
        {1, 1.0 / 3.0, 0, 0.9 + 0.05 / 3.0},
        {1, 0.05, 1, 0.9225},
    };
    int index = 0;
    for (const Case& c : cases) {
        auto t = trajectory::parse(
            "<think>x</think><answer>gold</answer>", "eq1", "q",
            {c.em == 1 ? "gold" : "other"});
        auto breakdown = reward::combined_reward(t, paper, c.info_think,
                                                 c.think_answer);
        if (breakdown.r_em != c.em ||
            std::fabs(breakdown.total - c.expected) > 1e-12) {
            criterion.fail("combo " + std::to_string(index) + ": got " +
                           std::to_string(breakdown.total) + " expected " +
                           std::to_string(c.expected));
        }
        ++index;
    }
    criterion.finish(std::to_string(index) +
                     " component combinations, |delta| <= 1e-12");
}

TEST_CASE("cohen's kappa") {
    Criterion criterion("cohens-kappa");

    // Brute-force oracle: tally the 2x2 confusion matrix, apply the formula.
    auto oracle = [](const std::vector<int>& x, const std::vector<int>& y,
                     double& ratio, double& kappa) {
        double a = 0, b = 0, c = 0, d = 0;
        for (size_t i = 0; i < x.size(); ++i) {
            if (x[i] == 1 && y[i] == 1) ++a;
            else if (x[i] == 1) ++b;
            else if (y[i] == 1) ++c;
            else ++d;
        }
        const double n = static_cast<double>(x.size());
        ratio = (a + d) / n;
        const double p_e = ((a + b) * (a + c) + (c + d) * (b + d)) / (n * n);
        kappa = p_e >= 1.0 ? (ratio == 1.0 ? 1.0 : 0.0)
                           : (ratio - p_e) / (1.0 - p_e);
    };

    std::mt19937 rng(1863);
    for (int trial = 0; trial < 1000; ++trial) {
        const size_t len = 1 + rng() % 200;
        std::vector<int> x(len), y(len);
        const int bias_x = rng() % 11;
        const int bias_y = rng() % 11;
        for (size_t i = 0; i < len; ++i) {
            x[i] = static_cast<int>(rng() % 10) < bias_x ? 1 : 0;
            y[i] = rng() % 3 == 0 ? x[i]
                                  : (static_cast<int>(rng() % 10) < bias_y ? 1 : 0);
        }
        auto report = agreement::agreement(
            agreement::LabelSequence{x, "x", metrics::FaithDimension::InfoThink},
            agreement::LabelSequence{y, "y", metrics::FaithDimension::InfoThink});
        double ratio, kappa;
        oracle(x, y, ratio, kappa);
        if (std::fabs(report.kappa - kappa) > 1e-9 ||
            std::fabs(report.consistent_ratio - ratio) > 1e-9) {
            criterion.fail("trial " + std::to_string(trial) + " diverges");
        }
    }

    // Hand-computed example: p_o = 0.75, p_e = 0.5, kappa = 0.5 exactly.
    auto hand = agreement::agreement(
        agreement::LabelSequence{{1, 1, 0, 0}, "a",
                                 metrics::FaithDimension::InfoThink},
        agreement::LabelSequence{{1, 0, 0, 0}, "b",
                                 metrics::FaithDimension::InfoThink});
    if (hand.kappa != 0.5 || hand.consistent_ratio != 0.75) {
        criterion.fail("hand example mismatch");
    }

    // Independence smoke test: mean kappa of independent raters ~ 0.
    double kappa_sum = 0;
    const int trials = 20;
    for (int trial = 0; trial < trials; ++trial) {
        std::vector<int> x(10000), y(10000);
        for (size_t i = 0; i < x.size(); ++i) {
            x[i] = static_cast<int>(rng() % 2);
            y[i] = static_cast<int>(rng() % 2);
        }
        kappa_sum += agreement::agreement(
                         agreement::LabelSequence{
                             x, "x", metrics::FaithDimension::InfoThink},
                         agreement::LabelSequence{
                             y, "y", metrics::FaithDimension::InfoThink})
                         .kappa;
    }
    if (std::fabs(kappa_sum / trials) >= 0.05) {
        criterion.fail("independence smoke test: |mean kappa| = " +
                       std::to_string(std::fabs(kappa_sum / trials)));
    }
    criterion.finish("1000 random pairs vs oracle, hand example, n=10000 smoke");
}

TEST_CASE("exact-match normalization fixtures") {
    Criterion criterion("em-normalization");
    struct Case {
        const char* predicted;
        const char* gold;
        int label;
    };
    // Hand-derived through lowercase -> article removal -> punctuation
    // removal -> whitespace collapse.
    const Case cases[] = {
        {"The Eiffel Tower", "eiffel tower", 1},
        {"Paris", "Paris", 1},
        {"Paris, France", "Paris", 0},
        {"a cat", "cat", 1},
        {"an apple", "apple", 1},
        {"the the the answer", "answer", 1},
        {"another", "nother", 0},         // "an" inside a word survives
        {"theory", "ory", 0},             // "the" inside a word survives
        // Articles are removed before punctuation, so the dot-bounded "a"
        // in "U.S.A." is standalone and drops out.
        {"U.S.A.", "us", 1},
        {"U.S.A.", "usa", 0},
        {"don't", "dont", 1},
        {"well-known", "wellknown", 1},
        {"  spaced   out  ", "spaced out", 1},
        {"TABS\tand\nnewlines", "tabs and newlines", 1},
        {"42", "42", 1},
        {"42", "42.0", 0},
        {"$5.99", "599", 1},
        {"1,000,000", "1000000", 1},
        {"The Lord of the Rings", "lord of rings", 1},
        {"Lord of the Ring", "lord of rings", 0},
        {"MOUNT EVEREST!", "mount everest", 1},
        {"(Jimmy) Carter", "jimmy carter", 1},
        {"carter", "jimmy carter", 0},
        {"'quoted'", "quoted", 1},
        {"semi;colon", "semicolon", 1},
        {"", "", 1},  // both normalize to empty
    };
    int index = 0;
    for (const Case& c : cases) {
        std::vector<std::string> golds = {c.gold};
        if (reward::exact_match(c.predicted, golds) != c.label) {
            criterion.fail("case " + std::to_string(index) + " (\"" +
                           c.predicted + "\" vs \"" + c.gold + "\")");
        }
        ++index;
    }
    criterion.finish(std::to_string(index) + " hand-labeled pairs");
}

TEST_CASE("hermetic end-to-end scoring") {
    Criterion criterion("hermetic-e2e");
    const fs::path fixtures(VERITAS_FIXTURE_DIR);
    const fs::path corpus = fixtures / "corpus.jsonl";
    const fs::path golden = fixtures / "golden" / "score";

    auto run_score = [&](const fs::path& out_dir) {
        fs::remove_all(out_dir);
        fs::create_directories(out_dir);
        const std::string command = std::string(VERITAS_CLI_BIN) + " score " +
                                    corpus.string() +
                                    " --mock --weights veritas -o " +
                                    out_dir.string() + " >/dev/null 2>&1";
        return std::system(command.c_str());
    };

    const fs::path run1 = fs::temp_directory_path() / "veritas-acc-run1";
    const fs::path run2 = fs::temp_directory_path() / "veritas-acc-run2";
    if (run_score(run1) != 0 || run_score(run2) != 0) {
        criterion.fail("score command failed");
    } else {
        const char* files[] = {"rewards.jsonl", "scores.jsonl",
                               "verdicts.jsonl", "summary.json", "summary.csv",
                               "summary.txt",   "errors.jsonl",
                               "manifest.json"};
        for (const char* name : files) {
            if (!fs::exists(golden / name)) {
                criterion.fail(std::string("missing golden file ") + name);
                continue;
            }
            const std::string expected = read_file(golden / name);
            if (read_file(run1 / name) != expected) {
                criterion.fail(std::string(name) + " differs from golden");
            }
            if (read_file(run2 / name) != expected) {
                criterion.fail(std::string(name) + " differs across runs");
            }
        }
    }
    criterion.finish("20-trajectory corpus, 8 output files, 2 runs vs golden");
}

TEST_CASE("prompt fidelity") {
    Criterion criterion("prompt-fidelity");
    const fs::path fixtures(VERITAS_FIXTURE_DIR);
    const struct {
        metrics::FaithDimension dim;
        const char* file;
        trajectory::BlockKind premise;
        trajectory::BlockKind conclusion;
    } cases[] = {
        {metrics::FaithDimension::ThinkSearch, "templates/think_search.txt",
         BlockKind::Think, BlockKind::Search},
        {metrics::FaithDimension::InfoThink, "templates/info_think.txt",
         BlockKind::Information, BlockKind::Think},
    };
    for (const auto& c : cases) {
        metrics::FaithfulnessPair pair{
            c.dim, trajectory::Block{c.premise, "premise body", {}},
            trajectory::Block{c.conclusion, "conclusion body", {}}, "pf", 0};
        std::string expected = read_file(fixtures / c.file);
        const std::string placeholder = "{input_string}";
        const size_t at = expected.find(placeholder);
        if (at == std::string::npos) {
            criterion.fail("template file lacks the placeholder");
            continue;
        }
        expected.replace(at, placeholder.size(), judge::serialize_pair(pair));
        if (judge::render_prompt(pair).text != expected) {
            criterion.fail(std::string(c.file) + " render differs");
        }
        // The template body itself must match byte-for-byte too.
        if (judge::prompt_template(c.dim) != read_file(fixtures / c.file)) {
            criterion.fail(std::string(c.file) + " template bytes differ");
        }
    }
    criterion.finish("2 templates, byte-exact modulo substitution");
}

TEST_CASE("split determinism") {
    Criterion criterion("split-determinism");
    std::vector<datasetio::LabeledExample> examples;
    for (int i = 0; i < 1000; ++i) {
        datasetio::LabeledExample ex;
        ex.id = "ex-" + std::to_string(i);
        ex.dimension = metrics::FaithDimension::InfoThink;
        ex.input_string = "x";
        ex.label = i % 2;
        examples.push_back(std::move(ex));
    }
    const datasetio::SplitSpec spec{0.8, 12345};
    auto [train, eval] = datasetio::split(examples, spec);
    if (train.size() != 800) criterion.fail("train size off");
    std::set<std::string> base;
    for (const auto& e : train) base.insert(e.id);

    std::mt19937 rng(100);
    for (int trial = 0; trial < 50; ++trial) {
        auto shuffled = examples;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        auto [strain, seval] = datasetio::split(shuffled, spec);
        std::set<std::string> membership;
        for (const auto& e : strain) membership.insert(e.id);
        if (membership != base) {
            criterion.fail("membership changed under permutation " +
                           std::to_string(trial));
        }
        if (strain.size() + seval.size() != examples.size()) {
            criterion.fail("split is not a partition");
        }
    }
    criterion.finish("1000 examples, 50 permutations");
}
