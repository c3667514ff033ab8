#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rrnlab/dsl.hpp"
#include "rrnlab/kb.hpp"

namespace rrnlab {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Sample facts file: optional `# individuals: ...` roster header (keeps
/// individuals that no fact mentions), then one triple per line in the
/// facts TSV format.
std::string sample_to_tsv(const SampleKB& sample);
SampleKB sample_from_tsv(VocabularyPtr vocab, std::string_view text,
                         std::string provenance = {},
                         bool allow_contradiction = false);

/// Labels file: subject, predicate, object, true|false,
/// specified|inferable. Atoms are stored in positive form.
std::string labels_to_tsv(const SampleKB& sample,
                          std::span<const LabeledQuery> labels);
std::vector<LabeledQuery> labels_from_tsv(const SampleKB& sample,
                                          std::string_view text);

struct DatasetManifest {
    std::string name;
    std::string version;
    std::string ontology_file = "ontology.ont";
    std::uint64_t seed = 0;
    std::map<std::string, std::vector<std::string>> splits;  // split -> files
    nlohmann::json params;

    nlohmann::json to_json() const;
    static DatasetManifest from_json(const nlohmann::json& j);
};

void write_manifest(const std::filesystem::path& dir, const DatasetManifest& m);
DatasetManifest read_manifest(const std::filesystem::path& dir);

struct LoadedSample {
    std::string file;
    SampleKB facts;
    std::vector<LabeledQuery> labels;
};

struct LoadedDataset {
    DatasetManifest manifest;
    Program program;
    std::map<std::string, std::vector<LoadedSample>> splits;
};

/// Reads manifest, ontology and the requested splits (all when empty).
LoadedDataset load_dataset(const std::filesystem::path& dir,
                           const std::vector<std::string>& splits = {});

}  // namespace rrnlab
