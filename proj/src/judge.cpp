#include "veritas/judge.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <set>
#include <thread>

#include "veritas/trajectory.hpp"

namespace veritas::judge {

using metrics::FaithDimension;

namespace {

constexpr std::string_view kThinkSearchTemplate =
    "You are a helpful judge. The content between <think></think> is a "
    "language model's reasoning process after receiving new information. The "
    "content between <search></search> is the search query generated by this "
    "model after its reasoning process. Output 1 if the search query is "
    "clearly based on and follows from its reasoning process. Output 0 if the "
    "search query does not align with or follow from its reasoning process. "
    "The content is:\n{input_string}.\n";

constexpr std::string_view kInfoThinkTemplate =
    "You will be given some content containing the information from a "
    "retriever and the thinking process of a language model. The content "
    "between <information></information> is the retrieved information given "
    "by a retriever. The content between <think></think> is language model's "
    "reasoning process after seeing the retrieved information.\n"
    "Please judge whether the language model considers the retrieved "
    "information. Output 1 if the reasoning process considers the retrieved "
    "information. Output 0 if the reasoning process does not consider the "
    "retrieved information. The content is:\n{input_string}.\n"
    "Please only output the score number.";

constexpr std::string_view kPlaceholder = "{input_string}";

}  // namespace

std::string_view prompt_template(FaithDimension d) {
    switch (d) {
        case FaithDimension::ThinkSearch: return kThinkSearchTemplate;
        case FaithDimension::InfoThink: return kInfoThinkTemplate;
        case FaithDimension::ThinkAnswer: throw UnsupportedDimensionError();
    }
    throw UnsupportedDimensionError();
}

std::string serialize_pair(const metrics::FaithfulnessPair& pair) {
    using trajectory::close_tag;
    using trajectory::open_tag;
    return open_tag(pair.premise.kind) + pair.premise.content +
           close_tag(pair.premise.kind) + "\n" +
           open_tag(pair.conclusion.kind) + pair.conclusion.content +
           close_tag(pair.conclusion.kind);
}

JudgePrompt render_prompt(const metrics::FaithfulnessPair& pair) {
    std::string text{prompt_template(pair.dimension)};
    const size_t at = text.find(kPlaceholder);
    text.replace(at, kPlaceholder.size(), serialize_pair(pair));
    return JudgePrompt{pair.dimension, std::move(text),
                       PairRef{pair.trajectory_id, pair.dimension,
                               pair.pair_index}};
}

std::optional<int> parse_verdict(std::string_view raw) {
    auto is_space = [](char c) {
        return std::isspace(static_cast<unsigned char>(c)) != 0;
    };
    size_t b = 0, e = raw.size();
    while (b < e && is_space(raw[b])) ++b;
    while (e > b && is_space(raw[e - 1])) --e;
    std::string_view trimmed = raw.substr(b, e - b);
    if (trimmed == "0") return 0;
    if (trimmed == "1") return 1;

    // Salvage: first whitespace-delimited token that is a bare 0/1, allowing
    // surrounding punctuation ("1." or "(0)").
    size_t i = 0;
    while (i < trimmed.size()) {
        while (i < trimmed.size() && is_space(trimmed[i])) ++i;
        size_t j = i;
        while (j < trimmed.size() && !is_space(trimmed[j])) ++j;
        if (j > i) {
            size_t tb = i, te = j;
            while (tb < te && std::ispunct(static_cast<unsigned char>(trimmed[tb]))) ++tb;
            while (te > tb && std::ispunct(static_cast<unsigned char>(trimmed[te - 1]))) --te;
            std::string_view token = trimmed.substr(tb, te - tb);
            if (token == "0") return 0;
            if (token == "1") return 1;
        }
        i = j;
    }
    return std::nullopt;
}

namespace {

const std::set<std::string>& stopwords() {
    static const std::set<std::string> words = {
        "that",  "this",  "with",  "from",  "have",   "what",  "which",
        "their", "there", "would", "could", "should", "about", "been",
        "being", "were",  "they",  "them",  "then",   "than",  "these",
        "those", "when",  "where", "will",  "into",   "over",  "also",
        "because", "while", "after", "before", "such", "some",  "other",
        "only",  "does",  "needs", "need",  "more",   "most",  "very"};
    return words;
}

std::set<std::string> content_words(std::string_view text) {
    std::set<std::string> words;
    std::string current;
    auto flush = [&] {
        if (current.size() >= 4 && !stopwords().contains(current)) {
            words.insert(current);
        }
        current.clear();
    };
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            current.push_back(static_cast<char>(
                std::tolower(static_cast<unsigned char>(c))));
        } else {
            flush();
        }
    }
    flush();
    return words;
}

// Content of the last well-formed <kind>...</kind> region in the text. The
// template itself mentions empty "<tag></tag>" pairs, so the substituted pair
// is always the last occurrence.
std::optional<std::string> last_tagged_region(std::string_view text,
                                              trajectory::BlockKind kind) {
    const std::string open = trajectory::open_tag(kind);
    const std::string close = trajectory::close_tag(kind);
    std::optional<std::string> found;
    size_t pos = 0;
    while (true) {
        size_t at = text.find(open, pos);
        if (at == std::string_view::npos) break;
        size_t body = at + open.size();
        size_t end = text.find(close, body);
        if (end == std::string_view::npos) break;
        found = std::string(text.substr(body, end - body));
        pos = end + close.size();
    }
    return found;
}

}  // namespace

std::string mock_judge(const JudgePrompt& prompt) {
    trajectory::BlockKind premise_kind;
    trajectory::BlockKind conclusion_kind;
    if (prompt.dimension == FaithDimension::ThinkSearch) {
        premise_kind = trajectory::BlockKind::Think;
        conclusion_kind = trajectory::BlockKind::Search;
    } else {
        premise_kind = trajectory::BlockKind::Information;
        conclusion_kind = trajectory::BlockKind::Think;
    }
    auto premise = last_tagged_region(prompt.text, premise_kind);
    auto conclusion = last_tagged_region(prompt.text, conclusion_kind);
    if (!premise || !conclusion) return "0";

    const auto premise_words = content_words(*premise);
    const auto conclusion_words = content_words(*conclusion);
    for (const std::string& w : conclusion_words) {
        if (premise_words.contains(w)) return "1";
    }
    return "0";
}

std::string MockJudgeBackend::complete(const std::string& prompt) {
    // The dimension only picks which tags to look for; recover it from the
    // template preamble, which always precedes the substituted pair.
    const bool info_think =
        prompt.rfind("You will be given some content", 0) == 0;
    JudgePrompt p{info_think ? FaithDimension::InfoThink
                             : FaithDimension::ThinkSearch,
                  prompt, PairRef{}};
    return mock_judge(p);
}

HttpJudgeBackend::HttpJudgeBackend(JudgeBackendConfig config)
    : config_(std::move(config)) {
    std::string_view url = config_.endpoint;
    if (url.starts_with("https://")) {
        throw ConfigError("https endpoints are not supported in this build");
    }
    if (!url.starts_with("http://")) {
        throw ConfigError("judge endpoint must be an http:// URL");
    }
    if (config_.max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
    if (config_.parallelism < 1) throw ConfigError("parallelism must be >= 1");
    if (config_.temperature < 0) throw ConfigError("temperature must be >= 0");

    url.remove_prefix(7);
    const size_t slash = url.find('/');
    std::string_view authority = url.substr(0, slash);
    path_ = slash == std::string_view::npos ? "/" : std::string(url.substr(slash));
    const size_t colon = authority.rfind(':');
    if (colon == std::string_view::npos) {
        host_ = std::string(authority);
        port_ = 80;
    } else {
        host_ = std::string(authority.substr(0, colon));
        port_ = std::atoi(std::string(authority.substr(colon + 1)).c_str());
    }
    if (host_.empty() || port_ <= 0) {
        throw ConfigError("judge endpoint has no valid host:port");
    }
    if (const char* key = std::getenv(config_.api_key_env.c_str())) {
        api_key_ = key;
    }
}

std::string HttpJudgeBackend::name() const {
    return config_.model.empty() ? "http" : config_.model;
}

std::string HttpJudgeBackend::complete(const std::string& prompt) {
    httplib::Client client(host_, port_);
    const auto secs =
        std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    client.set_connection_timeout(std::max<long>(1, secs.count()), 0);
    client.set_read_timeout(std::max<long>(1, secs.count()), 0);
    if (!api_key_.empty()) client.set_bearer_token_auth(api_key_);

    nlohmann::json body{{"model", config_.model},
                        {"prompt", prompt},
                        {"temperature", config_.temperature}};
    auto res = client.Post(path_, body.dump(), "application/json");
    if (!res) {
        throw BackendError("judge request failed: " +
                           httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw BackendError("judge returned HTTP " + std::to_string(res->status));
    }
    auto parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("text") ||
        !parsed["text"].is_string()) {
        throw BackendError("judge response is not {\"text\": string}");
    }
    return parsed["text"].get<std::string>();
}

std::vector<JudgeVerdict> judge_pairs(
    std::span<const metrics::FaithfulnessPair> pairs, JudgeBackend& backend,
    JudgeBatchOptions options) {
    if (options.max_attempts < 1 || options.parallelism < 1) {
        throw ConfigError("judge batch options must be >= 1");
    }
    // Reject unjudgeable dimensions before any worker thread starts.
    for (const auto& pair : pairs) {
        if (pair.dimension == FaithDimension::ThinkAnswer) {
            throw UnsupportedDimensionError();
        }
    }

    std::vector<JudgeVerdict> verdicts(pairs.size());
    const std::string backend_name = backend.name();

    auto judge_one = [&](size_t i) {
        const JudgePrompt prompt = render_prompt(pairs[i]);
        JudgeVerdict v;
        v.pair_ref = prompt.pair_ref;
        v.backend = backend_name;
        std::string failure;
        for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
            try {
                v.raw = backend.complete(prompt.text);
                v.label = parse_verdict(v.raw);
                verdicts[i] = std::move(v);
                return;
            } catch (const std::exception& e) {
                // Any backend failure is treated as transient and retried;
                // the batch itself never aborts.
                failure = e.what();
            }
        }
        v.label = std::nullopt;
        v.raw = failure;
        verdicts[i] = std::move(v);
    };

    const size_t workers =
        std::min<size_t>(static_cast<size_t>(options.parallelism), pairs.size());
    if (workers <= 1) {
        for (size_t i = 0; i < pairs.size(); ++i) judge_one(i);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (size_t w = 0; w < workers; ++w) {
            threads.emplace_back([&] {
                while (true) {
                    const size_t i = next.fetch_add(1);
                    if (i >= pairs.size()) break;
                    judge_one(i);
                }
            });
        }
        for (auto& t : threads) t.join();
    }
    return verdicts;
}

}  // namespace veritas::judge
