#include "veritas/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <tuple>

#include "veritas/agreement.hpp"
#include "veritas/report.hpp"
#include "veritas/scoring.hpp"
#include "veritas/version.hpp"

namespace veritas::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using judge::ConfigError;

namespace {

std::string to_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(value));
    return buf;
}

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw datasetio::IoError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw datasetio::IoError("cannot write " + path.string());
    return out;
}

struct IngestedInput {
    std::string file;  // basename, for reports
    datasetio::Corpus corpus;
};

std::vector<IngestedInput> ingest_inputs(const RunConfig& config,
                                         bool needs_output_dir = true) {
    if (config.inputs.empty()) throw ConfigError("no input files given");
    if (needs_output_dir && config.output_dir.empty()) {
        throw ConfigError("an output directory is required");
    }
    std::vector<IngestedInput> inputs;
    for (const std::string& path : config.inputs) {
        inputs.push_back(IngestedInput{fs::path(path).filename().string(),
                                       datasetio::ingest(path)});
    }
    return inputs;
}

std::vector<datasetio::CorpusEntry> merged_entries(
    const std::vector<IngestedInput>& inputs) {
    std::vector<datasetio::CorpusEntry> entries;
    for (const auto& input : inputs) {
        entries.insert(entries.end(), input.corpus.entries.begin(),
                       input.corpus.entries.end());
    }
    return entries;
}

size_t total_errors(const std::vector<IngestedInput>& inputs) {
    size_t n = 0;
    for (const auto& input : inputs) n += input.corpus.errors.size();
    return n;
}

void write_errors_file(const fs::path& dir,
                       const std::vector<IngestedInput>& inputs) {
    if (total_errors(inputs) == 0) return;
    auto out = open_output(dir / "errors.jsonl");
    for (const auto& input : inputs) {
        for (const auto& e : input.corpus.errors) {
            json record = datasetio::sidecar_record(e);
            if (inputs.size() > 1) record["file"] = input.file;
            out << record.dump() << "\n";
        }
    }
}

void write_manifest(const fs::path& dir, const RunConfig& config,
                    const std::string& command) {
    auto out = open_output(dir / "manifest.json");
    out << run_manifest(config, command).dump(2) << "\n";
}

scoring::ScoreOptions score_options(const RunConfig& config) {
    scoring::ScoreOptions options;
    options.weights = config.weights;
    options.aggregation = config.aggregation;
    options.match_scope = config.match_scope;
    options.em_normalization = config.em_normalization;
    options.judge_max_attempts = config.judge.max_attempts;
    options.parallelism = config.parallelism;
    return options;
}

std::unique_ptr<judge::JudgeBackend> make_backend(const RunConfig& config) {
    if (config.mock) return std::make_unique<judge::MockJudgeBackend>();
    return std::make_unique<judge::HttpJudgeBackend>(config.judge);
}

// Pairs of the two judged dimensions, entry order, think-search first.
std::vector<metrics::FaithfulnessPair> judged_pairs(
    std::span<const datasetio::CorpusEntry> entries) {
    std::vector<metrics::FaithfulnessPair> pairs;
    for (const auto& entry : entries) {
        for (auto dim : {metrics::FaithDimension::ThinkSearch,
                         metrics::FaithDimension::InfoThink}) {
            auto extracted = metrics::extract_pairs(entry.traj, dim);
            pairs.insert(pairs.end(), extracted.begin(), extracted.end());
        }
    }
    return pairs;
}

std::map<std::string, std::string> dataset_lookup(
    std::span<const datasetio::CorpusEntry> entries) {
    std::map<std::string, std::string> lookup;
    for (const auto& entry : entries) lookup[entry.traj.id] = entry.dataset;
    return lookup;
}

// Rollups covering both scored entries and unparseable-but-identified lines,
// so format_valid_rate reflects template violations.
std::vector<report::TrajectoryRollup> all_rollups(
    std::span<const scoring::TrajectoryScore> scores,
    const std::vector<IngestedInput>& inputs) {
    std::vector<report::TrajectoryRollup> rollups;
    for (const auto& s : scores) rollups.push_back(scoring::to_rollup(s));
    for (const auto& input : inputs) {
        for (const auto& e : input.corpus.errors) {
            if (e.id.empty()) continue;
            report::TrajectoryRollup r;
            r.id = e.id;
            r.dataset = e.dataset;
            rollups.push_back(std::move(r));
        }
    }
    return rollups;
}

void write_summaries(const fs::path& dir,
                     std::span<const report::DatasetSummary> summaries) {
    open_output(dir / "summary.json")
        << report::emit(summaries, report::ReportFormat::Json);
    open_output(dir / "summary.csv")
        << report::emit(summaries, report::ReportFormat::Csv);
    open_output(dir / "summary.txt")
        << report::emit(summaries, report::ReportFormat::TextTable);
}

int run_scoring_command(const RunConfig& config, const std::string& command,
                        std::ostream& err, bool with_scores_and_summary) {
    if (!reward::weights_valid(config.weights)) {
        err << "error: invalid reward weights\n";
        return kExitConfig;
    }
    auto inputs = ingest_inputs(config);
    auto entries = merged_entries(inputs);
    auto backend = make_backend(config);
    auto scores = scoring::score_corpus(entries, score_options(config), *backend);

    const fs::path dir(config.output_dir);
    fs::create_directories(dir);

    {
        auto out = open_output(dir / "rewards.jsonl");
        for (const auto& s : scores) out << scoring::reward_record(s).dump() << "\n";
        for (const auto& input : inputs) {
            for (const auto& e : input.corpus.errors) {
                if (e.id.empty()) continue;
                out << scoring::failed_reward_record(e).dump() << "\n";
            }
        }
    }

    if (with_scores_and_summary) {
        {
            auto out = open_output(dir / "scores.jsonl");
            for (const auto& s : scores) {
                for (const auto& p : s.pair_scores) {
                    out << scoring::pair_score_record(p).dump() << "\n";
                }
            }
        }
        {
            auto out = open_output(dir / "verdicts.jsonl");
            for (const auto& s : scores) {
                for (const auto& v : s.judge_verdicts) {
                    out << scoring::verdict_record(v).dump() << "\n";
                }
            }
        }
        auto summaries = report::summarize(all_rollups(scores, inputs));
        write_summaries(dir, summaries);
    }

    write_errors_file(dir, inputs);
    write_manifest(dir, config, command);

    if (size_t failed = total_errors(inputs); failed > 0) {
        err << "note: " << failed << " line(s) failed to parse; see "
            << (dir / "errors.jsonl").string() << "\n";
    }
    return kExitOk;
}

using LabelKey = std::tuple<std::string, std::string, int>;

std::map<LabelKey, std::optional<int>> read_label_file(const std::string& path) {
    std::map<LabelKey, std::optional<int>> labels;
    std::istringstream in(read_file_bytes(path));
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception& e) {
            throw datasetio::IoError(path + ":" + std::to_string(lineno) +
                                     ": " + e.what());
        }
        if (!record.contains("trajectory_id") || !record.contains("dimension") ||
            !record.contains("pair_index")) {
            throw datasetio::IoError(path + ":" + std::to_string(lineno) +
                                     ": not a pair-score record");
        }
        LabelKey key{record["trajectory_id"].get<std::string>(),
                     record["dimension"].get<std::string>(),
                     record["pair_index"].get<int>()};
        std::optional<int> label;
        if (record.contains("label") && record["label"].is_number_integer()) {
            label = record["label"].get<int>();
        }
        labels[key] = label;
    }
    return labels;
}

}  // namespace

void apply_config_json(const nlohmann::json& file, RunConfig& config) {
    if (!file.is_object()) throw ConfigError("config file must hold an object");
    static const std::set<std::string> known = {
        "inputs",       "input",          "output_dir", "weights",
        "mock",         "judge",          "aggregation", "match_scope",
        "em_normalization", "split",      "parallelism", "teacher"};
    for (auto it = file.begin(); it != file.end(); ++it) {
        if (!known.contains(it.key())) {
            throw ConfigError("unknown config key: " + it.key());
        }
    }

    if (file.contains("input")) config.inputs = {file["input"].get<std::string>()};
    if (file.contains("inputs")) {
        config.inputs.clear();
        for (const auto& p : file["inputs"]) {
            config.inputs.push_back(p.get<std::string>());
        }
    }
    if (file.contains("output_dir")) {
        config.output_dir = file["output_dir"].get<std::string>();
    }
    if (file.contains("weights")) {
        const auto& w = file["weights"];
        if (w.is_string()) {
            auto preset = reward::weights_preset(w.get<std::string>());
            if (!preset) throw ConfigError("unknown weights preset: " +
                                           w.get<std::string>());
            config.weights = *preset;
        } else {
            config.weights.em = w.value("em", config.weights.em);
            config.weights.info_think =
                w.value("info_think", config.weights.info_think);
            config.weights.think_answer =
                w.value("think_answer", config.weights.think_answer);
            config.weights.format_bonus =
                w.value("format_bonus", config.weights.format_bonus);
        }
    }
    if (file.contains("mock")) config.mock = file["mock"].get<bool>();
    if (file.contains("judge")) {
        const auto& j = file["judge"];
        config.judge.endpoint = j.value("endpoint", config.judge.endpoint);
        config.judge.model = j.value("model", config.judge.model);
        config.judge.temperature =
            j.value("temperature", config.judge.temperature);
        config.judge.max_attempts =
            j.value("max_attempts", config.judge.max_attempts);
        if (j.contains("timeout_ms")) {
            config.judge.timeout =
                std::chrono::milliseconds(j["timeout_ms"].get<long>());
        }
        config.judge.parallelism =
            j.value("parallelism", config.judge.parallelism);
        config.judge.api_key_env =
            j.value("api_key_env", config.judge.api_key_env);
        if (!config.judge.endpoint.empty()) config.mock = false;
    }
    if (file.contains("aggregation")) {
        auto policy = metrics::aggregate_policy_from_name(
            file["aggregation"].get<std::string>());
        if (!policy) throw ConfigError("unknown aggregation policy");
        config.aggregation = *policy;
    }
    if (file.contains("match_scope")) {
        const std::string scope = file["match_scope"].get<std::string>();
        if (scope == "last_think") config.match_scope = metrics::MatchScope::LastThink;
        else if (scope == "full_trajectory")
            config.match_scope = metrics::MatchScope::FullTrajectory;
        else throw ConfigError("unknown match_scope: " + scope);
    }
    if (file.contains("em_normalization")) {
        const std::string mode = file["em_normalization"].get<std::string>();
        if (mode == "standard")
            config.em_normalization = reward::EmNormalization::Standard;
        else if (mode == "identity")
            config.em_normalization = reward::EmNormalization::Identity;
        else throw ConfigError("unknown em_normalization: " + mode);
    }
    if (file.contains("split")) {
        config.split.train_fraction =
            file["split"].value("train_fraction", config.split.train_fraction);
        config.split.seed = file["split"].value("seed", config.split.seed);
    }
    if (file.contains("parallelism")) {
        config.parallelism = file["parallelism"].get<int>();
        if (config.parallelism < 1) throw ConfigError("parallelism must be >= 1");
    }
    if (file.contains("teacher")) {
        config.teacher = file["teacher"].get<std::string>();
    }
}

nlohmann::ordered_json config_to_json(const RunConfig& config) {
    json weights{{"em", config.weights.em},
                 {"info_think", config.weights.info_think},
                 {"think_answer", config.weights.think_answer},
                 {"format_bonus", config.weights.format_bonus}};
    json judge_cfg{{"endpoint", config.judge.endpoint},
                   {"model", config.judge.model},
                   {"temperature", config.judge.temperature},
                   {"max_attempts", config.judge.max_attempts},
                   {"timeout_ms", config.judge.timeout.count()},
                   {"parallelism", config.judge.parallelism},
                   {"api_key_env", config.judge.api_key_env}};
    return json{
        {"weights", weights},
        {"mock", config.mock},
        {"judge", judge_cfg},
        {"aggregation", metrics::aggregate_policy_name(config.aggregation)},
        {"match_scope", config.match_scope == metrics::MatchScope::LastThink
                            ? "last_think"
                            : "full_trajectory"},
        {"em_normalization",
         config.em_normalization == reward::EmNormalization::Standard
             ? "standard"
             : "identity"},
        {"split", json{{"train_fraction", config.split.train_fraction},
                       {"seed", config.split.seed}}},
        {"parallelism", config.parallelism},
        {"teacher", config.teacher},
    };
}

nlohmann::ordered_json run_manifest(const RunConfig& config,
                                    const std::string& command) {
    const json canonical = config_to_json(config);
    json inputs = json::array();
    for (const std::string& path : config.inputs) {
        inputs.push_back(
            json{{"file", fs::path(path).filename().string()},
                 {"fnv1a64", to_hex(datasetio::stable_hash(read_file_bytes(path)))}});
    }
    return json{{"tool", std::string(kToolName)},
                {"version", std::string(kToolVersion)},
                {"command", command},
                {"config", canonical},
                {"config_hash", to_hex(datasetio::stable_hash(canonical.dump()))},
                {"inputs", inputs}};
}

int cmd_validate(const RunConfig& config, std::ostream& out,
                 std::ostream& err) {
    std::vector<IngestedInput> inputs;
    try {
        inputs = ingest_inputs(config, /*needs_output_dir=*/false);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    bool all_valid = true;
    for (const auto& input : inputs) {
        struct Row {
            size_t line;
            json record;
        };
        std::vector<Row> rows;
        for (const auto& entry : input.corpus.entries) {
            auto verdict = trajectory::check_format(entry.traj);
            json violations = json::array();
            for (auto v : verdict.violations) {
                violations.push_back(std::string(trajectory::violation_name(v)));
            }
            json record{{"line", entry.line},
                        {"id", entry.traj.id},
                        {"valid", verdict.valid},
                        {"violations", violations}};
            if (inputs.size() > 1) record["file"] = input.file;
            if (!verdict.valid) all_valid = false;
            rows.push_back(Row{entry.line, std::move(record)});
        }
        for (const auto& e : input.corpus.errors) {
            json violations = json::array();
            if (e.kind == datasetio::SidecarKind::BadTags) {
                violations.push_back(std::string(trajectory::violation_name(
                    trajectory::FormatViolation::UnclosedTag)));
            }
            json record{{"line", e.line}};
            if (!e.id.empty()) record["id"] = e.id;
            record["valid"] = false;
            record["violations"] = violations;
            record["error"] = e.error;
            if (inputs.size() > 1) record["file"] = input.file;
            all_valid = false;
            rows.push_back(Row{e.line, std::move(record)});
        }
        std::sort(rows.begin(), rows.end(),
                  [](const Row& a, const Row& b) { return a.line < b.line; });
        for (const auto& row : rows) out << row.record.dump() << "\n";
    }
    return all_valid ? kExitOk : kExitFailed;
}

int cmd_score(const RunConfig& config, std::ostream& err) {
    try {
        return run_scoring_command(config, "score", err, true);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_reward(const RunConfig& config, std::ostream& err) {
    try {
        return run_scoring_command(config, "reward", err, false);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_judge(const RunConfig& config, std::ostream& err) {
    try {
        auto inputs = ingest_inputs(config);
        auto entries = merged_entries(inputs);
        auto backend = make_backend(config);
        auto pairs = judged_pairs(entries);
        auto verdicts = judge::judge_pairs(
            pairs, *backend,
            judge::JudgeBatchOptions{config.judge.max_attempts,
                                     config.judge.parallelism});

        const fs::path dir(config.output_dir);
        fs::create_directories(dir);
        {
            auto out = open_output(dir / "verdicts.jsonl");
            for (const auto& v : verdicts) {
                out << scoring::verdict_record(v).dump() << "\n";
            }
        }
        write_errors_file(dir, inputs);
        write_manifest(dir, config, "judge");
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_export(const RunConfig& config, std::ostream& err) {
    try {
        auto inputs = ingest_inputs(config);
        auto entries = merged_entries(inputs);
        auto backend = make_backend(config);
        auto pairs = judged_pairs(entries);
        auto verdicts = judge::judge_pairs(
            pairs, *backend,
            judge::JudgeBatchOptions{config.judge.max_attempts,
                                     config.judge.parallelism});
        auto examples = datasetio::export_labeled(
            pairs, verdicts, dataset_lookup(entries),
            config.teacher.empty() ? backend->name() : config.teacher);
        auto [train, eval] = datasetio::split(examples, config.split);

        const fs::path dir(config.output_dir);
        fs::create_directories(dir);
        {
            auto out = open_output(dir / "labeled.jsonl");
            datasetio::write_labeled(out, examples);
        }
        {
            auto out = open_output(dir / "train.jsonl");
            datasetio::write_labeled(out, train);
        }
        {
            auto out = open_output(dir / "eval.jsonl");
            datasetio::write_labeled(out, eval);
        }
        write_errors_file(dir, inputs);
        write_manifest(dir, config, "export");
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_agree(const AgreeArgs& args, std::ostream& out, std::ostream& err) {
    try {
        if (args.inputs.size() < 2) {
            err << "error: agree needs at least two label files\n";
            return kExitConfig;
        }
        std::vector<std::map<LabelKey, std::optional<int>>> files;
        for (const auto& path : args.inputs) {
            files.push_back(read_label_file(path));
        }

        // Keys present in every file, optionally restricted to one dimension.
        std::vector<LabelKey> keys;
        size_t dropped_unmatched = 0, dropped_unparseable = 0;
        for (const auto& [key, label] : files[0]) {
            if (args.dimension &&
                std::get<1>(key) != metrics::dimension_name(*args.dimension)) {
                continue;
            }
            bool everywhere = true;
            bool parseable = label.has_value();
            for (size_t f = 1; f < files.size(); ++f) {
                auto it = files[f].find(key);
                if (it == files[f].end()) {
                    everywhere = false;
                    break;
                }
                if (!it->second.has_value()) parseable = false;
            }
            if (!everywhere) {
                ++dropped_unmatched;
                continue;
            }
            if (!parseable) {
                ++dropped_unparseable;
                continue;
            }
            keys.push_back(key);
        }
        // Unmatched keys from the other files count too.
        for (size_t f = 1; f < files.size(); ++f) {
            for (const auto& [key, label] : files[f]) {
                if (args.dimension &&
                    std::get<1>(key) != metrics::dimension_name(*args.dimension)) {
                    continue;
                }
                if (!files[0].contains(key)) ++dropped_unmatched;
            }
        }

        if (keys.empty()) {
            err << "error: no overlapping labeled pairs between the inputs\n";
            return kExitFailed;
        }

        auto dimension = metrics::dimension_from_name(std::get<1>(keys[0]))
                             .value_or(metrics::FaithDimension::InfoThink);
        std::vector<agreement::LabelSequence> sequences;
        for (size_t f = 0; f < files.size(); ++f) {
            agreement::LabelSequence seq;
            seq.rater = fs::path(args.inputs[f]).filename().string();
            seq.dimension = dimension;
            for (const auto& key : keys) seq.labels.push_back(*files[f].at(key));
            sequences.push_back(std::move(seq));
        }

        if (args.inputs.size() > 2 || args.matrix_csv) {
            auto matrix = agreement::pairwise_matrix(sequences);
            out << agreement::matrix_to_csv(matrix, sequences);
            return kExitOk;
        }

        auto report = agreement::agreement(sequences[0], sequences[1]);
        json output{
            {"n", report.n},
            {"consistent_ratio", report.consistent_ratio},
            {"kappa", report.kappa},
            {"confusion", json{{"a", report.confusion.a},
                               {"b", report.confusion.b},
                               {"c", report.confusion.c},
                               {"d", report.confusion.d}}},
            {"degenerate_marginals", report.degenerate_marginals},
            {"dropped_unmatched", dropped_unmatched},
            {"dropped_unparseable", dropped_unparseable}};
        out << output.dump(2) << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_report(const ReportArgs& args, std::ostream& err) {
    try {
        struct RewardRow {
            std::string id, dataset;
            int r_em = 0;
            bool format_valid = false;
        };
        std::vector<RewardRow> rows;
        {
            std::istringstream in(read_file_bytes(args.rewards_file));
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                json record = json::parse(line);
                rows.push_back(RewardRow{record.value("id", ""),
                                         record.value("dataset", ""),
                                         record.value("r_em", 0),
                                         record.value("format_valid", false)});
            }
        }

        // Per-trajectory label lists per dimension.
        std::map<std::string, std::map<std::string, std::vector<int>>> labels;
        auto add_labels = [&](const std::string& path, bool judged_only) {
            for (const auto& [key, label] : read_label_file(path)) {
                const auto& [id, dimension, index] = key;
                if (judged_only && dimension == "think-answer") continue;
                labels[id][dimension].push_back(label.value_or(0));
            }
        };
        if (!args.verdicts_file.empty()) {
            // Verdicts carry unparseable entries; they count as 0 exactly as
            // in the scoring pipeline.
            add_labels(args.verdicts_file, true);
            for (const auto& [key, label] : read_label_file(args.scores_file)) {
                const auto& [id, dimension, index] = key;
                if (dimension == "think-answer") {
                    labels[id][dimension].push_back(label.value_or(0));
                }
            }
        } else {
            add_labels(args.scores_file, false);
        }

        std::vector<report::TrajectoryRollup> rollups;
        for (const auto& row : rows) {
            report::TrajectoryRollup rollup;
            rollup.id = row.id;
            rollup.dataset = row.dataset;
            rollup.r_em = row.r_em;
            rollup.format_valid = row.format_valid;
            auto it = labels.find(row.id);
            if (it != labels.end()) {
                auto agg = [&](const char* dim) -> std::optional<double> {
                    auto d = it->second.find(dim);
                    if (d == it->second.end() || d->second.empty()) {
                        return std::nullopt;
                    }
                    double sum = 0;
                    int minimum = 1;
                    for (int l : d->second) {
                        sum += l;
                        minimum = std::min(minimum, l);
                    }
                    switch (args.aggregation) {
                        case metrics::AggregatePolicy::Mean:
                            return sum / static_cast<double>(d->second.size());
                        case metrics::AggregatePolicy::Min:
                            return static_cast<double>(minimum);
                        case metrics::AggregatePolicy::All:
                            return minimum == 1 ? 1.0 : 0.0;
                    }
                    return std::nullopt;
                };
                rollup.think_search = agg("think-search");
                rollup.info_think = agg("info-think");
                auto ta = it->second.find("think-answer");
                if (ta != it->second.end() && !ta->second.empty()) {
                    rollup.think_answer = ta->second.front();
                }
            }
            rollups.push_back(std::move(rollup));
        }

        const fs::path dir(args.output_dir);
        fs::create_directories(dir);
        write_summaries(dir, report::summarize(rollups));
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

}  // namespace veritas::cli
