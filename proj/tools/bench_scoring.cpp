// Throughput comparison of the serial reference scorer against the OpenMP
// driver on a synthetic corpus, with an equality check between the two.

#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "veritas/datasetio.hpp"
#include "veritas/scoring.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace veritas;

namespace {

std::string word(std::mt19937& rng) {
    static const char* words[] = {"eiffel", "tower",  "opened", "paris",
                                  "treaty", "signed", "capital", "census",
                                  "report", "figure", "record", "sources"};
    return words[rng() % 12];
}

std::string sentence(std::mt19937& rng, int n) {
    std::string out;
    for (int i = 0; i < n; ++i) {
        if (!out.empty()) out += " ";
        out += word(rng);
    }
    return out;
}

datasetio::Corpus synthetic_corpus(size_t rollouts, unsigned seed) {
    std::mt19937 rng(seed);
    std::ostringstream jsonl;
    for (size_t i = 0; i < rollouts; ++i) {
        const int turns = 1 + static_cast<int>(rng() % 3);
        std::string body = "<think>" + sentence(rng, 12) + "</think>";
        for (int t = 0; t < turns; ++t) {
            body += "<search>" + sentence(rng, 5) + "</search>";
            body += "<information>" + sentence(rng, 40) + "</information>";
            body += "<think>" + sentence(rng, 15) + "</think>";
        }
        body += "<answer>" + word(rng) + "</answer>";
        datasetio::json record{{"id", "bench-" + std::to_string(i)},
                               {"question", sentence(rng, 8)},
                               {"golden_answers",
                                datasetio::json::array({word(rng)})},
                               {"trajectory", body},
                               {"dataset", i % 2 ? "nq" : "hotpotqa"}};
        jsonl << record.dump() << "\n";
    }
    std::istringstream in(jsonl.str());
    return datasetio::ingest_stream(in);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
}

std::string fingerprint(const std::vector<scoring::TrajectoryScore>& scores) {
    std::ostringstream os;
    for (const auto& s : scores) {
        os << scoring::reward_record(s).dump() << "\n";
        for (const auto& p : s.pair_scores) {
            os << scoring::pair_score_record(p).dump() << "\n";
        }
    }
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    size_t rollouts = 5000;
    int max_threads = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--n" && i + 1 < argc) rollouts = std::stoul(argv[++i]);
        else if (arg == "--threads" && i + 1 < argc) max_threads = std::stoi(argv[++i]);
        else {
            std::fprintf(stderr, "usage: %s [--n rollouts] [--threads max]\n",
                         argv[0]);
            return 2;
        }
    }
#ifdef _OPENMP
    if (max_threads == 0) max_threads = omp_get_max_threads();
#else
    if (max_threads == 0) max_threads = 1;
    std::fprintf(stderr, "built without OpenMP; parallel path runs serially\n");
#endif

    auto corpus = synthetic_corpus(rollouts, 9001);
    scoring::ScoreOptions options;
    judge::MockJudgeBackend backend;

    std::printf("scoring %zu synthetic rollouts (mock judge)\n",
                corpus.entries.size());

    auto start = std::chrono::steady_clock::now();
    auto serial = scoring::score_corpus_serial(corpus.entries, options, backend);
    const double serial_s = seconds_since(start);
    std::printf("%-10s %8.3f s  %10.0f rollouts/s\n", "serial", serial_s,
                rollouts / serial_s);

    const std::string reference = fingerprint(serial);
    for (int threads = 2; threads <= max_threads; threads *= 2) {
        scoring::ScoreOptions parallel_options = options;
        parallel_options.parallelism = threads;
        start = std::chrono::steady_clock::now();
        auto parallel = scoring::score_corpus_parallel(corpus.entries,
                                                       parallel_options, backend);
        const double parallel_s = seconds_since(start);
        const bool same = fingerprint(parallel) == reference;
        std::printf("%-10s %8.3f s  %10.0f rollouts/s  speedup %.2fx  %s\n",
                    ("omp x" + std::to_string(threads)).c_str(), parallel_s,
                    rollouts / parallel_s, serial_s / parallel_s,
                    same ? "outputs match serial" : "OUTPUT MISMATCH");
        if (!same) return 1;
    }
    return 0;
}
