#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "veritas/metrics.hpp"

// LLM-as-a-judge plumbing for the two semantic faithfulness dimensions:
// prompt rendering, verdict parsing, batch dispatch with retries, and a
// deterministic mock backend for hermetic runs.

namespace veritas::judge {

struct PairRef {
    std::string trajectory_id;
    metrics::FaithDimension dimension = metrics::FaithDimension::InfoThink;
    int pair_index = 0;

    bool operator==(const PairRef&) const = default;
};

struct JudgePrompt {
    metrics::FaithDimension dimension;
    std::string text;  // fully rendered, template with the pair substituted
    PairRef pair_ref;
};

/// The judge prompt template for a dimension. `{input_string}` marks the
/// substitution point. Only think-search and info-think are judged.
std::string_view prompt_template(metrics::FaithDimension d);

/// Serialized form of a pair as the judge sees it: both blocks with their
/// original tags, joined by one newline.
std::string serialize_pair(const metrics::FaithfulnessPair& pair);

class UnsupportedDimensionError : public std::runtime_error {
public:
    UnsupportedDimensionError()
        : std::runtime_error(
              "think-answer is regex-scored and has no judge prompt") {}
};

JudgePrompt render_prompt(const metrics::FaithfulnessPair& pair);

/// Lenient binary verdict parse: exact "0"/"1" after trimming, else the
/// first standalone 0/1 token, else nullopt (unparseable).
std::optional<int> parse_verdict(std::string_view raw);

struct JudgeVerdict {
    PairRef pair_ref;
    std::optional<int> label;  // nullopt == unparseable
    std::string raw;           // verbatim backend output or failure description
    std::string backend;
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class BackendError : public std::runtime_error {
public:
    explicit BackendError(const std::string& what) : std::runtime_error(what) {}
};

/// Completion transport. Implementations must tolerate concurrent complete()
/// calls from multiple threads.
class JudgeBackend {
public:
    virtual ~JudgeBackend() = default;
    virtual std::string name() const = 0;
    /// Returns the raw completion text; throws BackendError on transport
    /// failure (retried by judge_pairs).
    virtual std::string complete(const std::string& prompt) = 0;
};

/// Deterministic judge used as a test oracle and for hermetic CLI runs:
/// outputs "1" iff premise and conclusion share a normalized content word
/// (>= 4 chars, non-stopword). Not a faithfulness claim.
std::string mock_judge(const JudgePrompt& prompt);

class MockJudgeBackend : public JudgeBackend {
public:
    std::string name() const override { return "mock"; }
    std::string complete(const std::string& prompt) override;
};

struct JudgeBackendConfig {
    std::string endpoint;  // e.g. http://127.0.0.1:8000/v1/complete
    std::string model;
    double temperature = 0.0;
    int max_attempts = 3;
    std::chrono::milliseconds timeout{30000};
    int parallelism = 1;
    std::string api_key_env = "VERITAS_API_KEY";  // credential, never logged
};

/// HTTP judge speaking the wire contract:
///   POST endpoint, JSON body {"model", "prompt", "temperature"}
///   response JSON {"text": string}
/// A connection is opened per request, so one instance is safe to share
/// across threads.
class HttpJudgeBackend : public JudgeBackend {
public:
    explicit HttpJudgeBackend(JudgeBackendConfig config);

    std::string name() const override;
    std::string complete(const std::string& prompt) override;

private:
    JudgeBackendConfig config_;
    std::string host_;
    std::string path_;
    int port_ = 80;
    std::string api_key_;
};

struct JudgeBatchOptions {
    int max_attempts = 3;
    int parallelism = 1;
};

/// Judge a batch of pairs. One verdict per pair, in input order regardless of
/// completion order. Transport failures are retried up to max_attempts; an
/// exhausted pair yields an unparseable verdict with the failure description
/// in raw. Never throws for per-pair failures.
std::vector<JudgeVerdict> judge_pairs(
    std::span<const metrics::FaithfulnessPair> pairs, JudgeBackend& backend,
    JudgeBatchOptions options = {});

}  // namespace veritas::judge
