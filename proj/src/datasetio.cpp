#include "veritas/datasetio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace veritas::datasetio {

namespace {

// Returns an error description, or empty on success.
std::string entry_from_json(const json& record, CorpusEntry& out,
                            SidecarKind& kind) {
    kind = SidecarKind::BadSchema;
    if (!record.is_object()) return "record is not a JSON object";
    if (!record.contains("id") || !record["id"].is_string()) {
        return "missing or non-string \"id\"";
    }
    if (!record.contains("trajectory") || !record["trajectory"].is_string()) {
        return "missing or non-string \"trajectory\"";
    }
    std::string question;
    if (record.contains("question")) {
        if (!record["question"].is_string()) return "non-string \"question\"";
        question = record["question"].get<std::string>();
    }
    std::vector<std::string> golden;
    if (record.contains("golden_answers")) {
        if (!record["golden_answers"].is_array()) {
            return "\"golden_answers\" is not an array";
        }
        for (const auto& g : record["golden_answers"]) {
            if (!g.is_string()) return "\"golden_answers\" holds a non-string";
            golden.push_back(g.get<std::string>());
        }
    }
    if (record.contains("dataset") && !record["dataset"].is_string()) {
        return "non-string \"dataset\"";
    }

    out.dataset = record.value("dataset", "");
    out.record = record;
    try {
        out.traj = trajectory::parse(record["trajectory"].get<std::string>(),
                                     record["id"].get<std::string>(),
                                     std::move(question), std::move(golden));
    } catch (const trajectory::ParseError& e) {
        kind = SidecarKind::BadTags;
        return e.what();
    }
    return {};
}

}  // namespace

Corpus ingest_stream(std::istream& in) {
    Corpus corpus;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;

        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception& e) {
            corpus.errors.push_back(SidecarEntry{lineno, e.what(), "", ""});
            continue;
        }

        CorpusEntry entry;
        SidecarKind kind = SidecarKind::BadSchema;
        std::string error = entry_from_json(record, entry, kind);
        if (!error.empty()) {
            SidecarEntry sidecar{lineno, std::move(error), "", "", kind};
            if (record.is_object()) {
                if (record.contains("id") && record["id"].is_string()) {
                    sidecar.id = record["id"].get<std::string>();
                }
                if (record.contains("dataset") && record["dataset"].is_string()) {
                    sidecar.dataset = record["dataset"].get<std::string>();
                }
            }
            corpus.errors.push_back(std::move(sidecar));
            continue;
        }
        entry.line = lineno;
        corpus.entries.push_back(std::move(entry));
    }
    return corpus;
}

Corpus ingest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return ingest_stream(in);
}

void write_corpus(std::ostream& out, std::span<const CorpusEntry> entries) {
    for (const CorpusEntry& e : entries) out << e.record.dump() << "\n";
}

json sidecar_record(const SidecarEntry& e) {
    json record{{"line", e.line}, {"error", e.error}};
    if (!e.id.empty()) record["id"] = e.id;
    if (!e.dataset.empty()) record["dataset"] = e.dataset;
    return record;
}

void write_sidecar(std::ostream& out, std::span<const SidecarEntry> errors) {
    for (const SidecarEntry& e : errors) out << sidecar_record(e).dump() << "\n";
}

std::vector<LabeledExample> export_labeled(
    std::span<const metrics::FaithfulnessPair> pairs,
    std::span<const judge::JudgeVerdict> verdicts,
    const std::map<std::string, std::string>& dataset_by_id,
    const std::string& teacher) {
    // Key pairs by (trajectory, dimension, index) for the verdict join.
    std::map<std::tuple<std::string, int, int>, const metrics::FaithfulnessPair*>
        by_ref;
    for (const auto& p : pairs) {
        by_ref[{p.trajectory_id, static_cast<int>(p.dimension), p.pair_index}] =
            &p;
    }

    std::vector<LabeledExample> examples;
    examples.reserve(verdicts.size());
    for (const auto& v : verdicts) {
        auto it = by_ref.find({v.pair_ref.trajectory_id,
                               static_cast<int>(v.pair_ref.dimension),
                               v.pair_ref.pair_index});
        if (it == by_ref.end()) {
            throw RefMismatchError("verdict for unknown pair " +
                                   v.pair_ref.trajectory_id + "#" +
                                   std::to_string(v.pair_ref.pair_index));
        }
        if (!v.label.has_value()) continue;  // unparseable: not training data

        const metrics::FaithfulnessPair& pair = *it->second;
        LabeledExample ex;
        ex.id = pair.trajectory_id + "#" +
                std::string(metrics::dimension_name(pair.dimension)) + "#" +
                std::to_string(pair.pair_index);
        ex.dimension = pair.dimension;
        ex.input_string = judge::serialize_pair(pair);
        ex.label = *v.label;
        auto ds = dataset_by_id.find(pair.trajectory_id);
        ex.source_dataset = ds == dataset_by_id.end() ? "" : ds->second;
        ex.teacher = teacher.empty() ? v.backend : teacher;
        examples.push_back(std::move(ex));
    }
    return examples;
}

void write_labeled(std::ostream& out, std::span<const LabeledExample> examples) {
    for (const LabeledExample& e : examples) {
        json record{{"id", e.id},
                    {"dimension", metrics::dimension_name(e.dimension)},
                    {"input_string", e.input_string},
                    {"label", e.label},
                    {"source_dataset", e.source_dataset},
                    {"teacher", e.teacher}};
        out << record.dump() << "\n";
    }
}

std::vector<LabeledExample> read_labeled(std::istream& in) {
    std::vector<LabeledExample> examples;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception& e) {
            throw IoError("labeled example line " + std::to_string(lineno) +
                          ": " + e.what());
        }
        auto dim = metrics::dimension_from_name(
            record.value("dimension", std::string{}));
        if (!dim || !record.contains("label") ||
            !record["label"].is_number_integer()) {
            throw IoError("labeled example line " + std::to_string(lineno) +
                          ": bad dimension or label");
        }
        LabeledExample ex;
        ex.id = record.value("id", "");
        ex.dimension = *dim;
        ex.input_string = record.value("input_string", "");
        ex.label = record["label"].get<int>();
        ex.source_dataset = record.value("source_dataset", "");
        ex.teacher = record.value("teacher", "");
        examples.push_back(std::move(ex));
    }
    return examples;
}

std::uint64_t stable_hash(std::string_view data) {
    std::uint64_t hash = 14695981039346656037ull;  // FNV offset basis
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 1099511628211ull;  // FNV prime
    }
    return hash;
}

std::pair<std::vector<LabeledExample>, std::vector<LabeledExample>> split(
    std::span<const LabeledExample> examples, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
        throw IoError("train_fraction must be in (0,1)");
    }

    struct Keyed {
        std::uint64_t key;
        std::string_view id;
        size_t index;
    };
    std::vector<Keyed> keyed;
    keyed.reserve(examples.size());
    const std::string seed_prefix = std::to_string(spec.seed) + "\x1f";
    for (size_t i = 0; i < examples.size(); ++i) {
        keyed.push_back(
            Keyed{stable_hash(seed_prefix + examples[i].id), examples[i].id, i});
    }
    std::sort(keyed.begin(), keyed.end(), [](const Keyed& x, const Keyed& y) {
        return std::tie(x.key, x.id, x.index) < std::tie(y.key, y.id, y.index);
    });

    const auto train_n = static_cast<size_t>(std::llround(
        static_cast<double>(examples.size()) * spec.train_fraction));
    std::vector<bool> in_train(examples.size(), false);
    for (size_t r = 0; r < keyed.size() && r < train_n; ++r) {
        in_train[keyed[r].index] = true;
    }

    std::pair<std::vector<LabeledExample>, std::vector<LabeledExample>> out;
    for (size_t i = 0; i < examples.size(); ++i) {
        (in_train[i] ? out.first : out.second).push_back(examples[i]);
    }
    return out;
}

}  // namespace veritas::datasetio
