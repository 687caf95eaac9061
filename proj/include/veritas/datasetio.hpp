#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "veritas/judge.hpp"
#include "veritas/metrics.hpp"
#include "veritas/trajectory.hpp"

// Corpus ingestion (JSONL, one rollout per line), labeled-example export for
// reward-model training, and the deterministic train/eval split.

namespace veritas::datasetio {

using json = nlohmann::ordered_json;

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// One successfully parsed corpus line. `record` holds the original JSON
/// object, unknown fields included, so writers can echo them.
struct CorpusEntry {
    trajectory::Trajectory traj;
    std::string dataset;
    json record;
    size_t line = 0;  // 1-based source line
};

enum class SidecarKind { BadJson, BadSchema, BadTags };

/// One rejected line (bad JSON, schema violation, or tag-parse failure).
/// id/dataset are filled when the JSON itself was readable.
struct SidecarEntry {
    size_t line = 0;  // 1-based
    std::string error;
    std::string id;
    std::string dataset;
    SidecarKind kind = SidecarKind::BadJson;
};

struct Corpus {
    std::vector<CorpusEntry> entries;
    std::vector<SidecarEntry> errors;
};

/// Read a JSONL corpus. Lines that fail are collected in the sidecar with
/// their line numbers; the rest of the file is still ingested.
Corpus ingest(const std::filesystem::path& path);
Corpus ingest_stream(std::istream& in);

/// Re-emit corpus records, echoing unknown fields verbatim.
void write_corpus(std::ostream& out, std::span<const CorpusEntry> entries);
void write_sidecar(std::ostream& out, std::span<const SidecarEntry> errors);
json sidecar_record(const SidecarEntry& e);

struct LabeledExample {
    std::string id;  // trajectory_id#dimension#pair_index
    metrics::FaithDimension dimension = metrics::FaithDimension::InfoThink;
    std::string input_string;  // exactly what render_prompt substitutes
    int label = 0;
    std::string source_dataset;
    std::string teacher;

    bool operator==(const LabeledExample&) const = default;
};

class RefMismatchError : public std::runtime_error {
public:
    explicit RefMismatchError(const std::string& what)
        : std::runtime_error(what) {}
};

/// Join pairs with their verdicts into training examples. Unparseable
/// verdicts are dropped; a verdict whose pair_ref matches no pair is an
/// error. dataset_by_id maps trajectory ids to their source dataset tag.
std::vector<LabeledExample> export_labeled(
    std::span<const metrics::FaithfulnessPair> pairs,
    std::span<const judge::JudgeVerdict> verdicts,
    const std::map<std::string, std::string>& dataset_by_id,
    const std::string& teacher);

void write_labeled(std::ostream& out, std::span<const LabeledExample> examples);
std::vector<LabeledExample> read_labeled(std::istream& in);

struct SplitSpec {
    double train_fraction = 0.8;  // in (0,1)
    std::uint64_t seed = 0;
};

/// FNV-1a 64-bit; platform-stable, used for split keying and manifests.
std::uint64_t stable_hash(std::string_view data);

/// Deterministic split keyed on hash(seed, id): membership depends only on
/// the id set, the fraction and the seed, never on input order. Output
/// preserves input order. Train size is round(n * train_fraction).
std::pair<std::vector<LabeledExample>, std::vector<LabeledExample>> split(
    std::span<const LabeledExample> examples, const SplitSpec& spec);

}  // namespace veritas::datasetio
