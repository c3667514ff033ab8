#pragma once

#include <filesystem>
#include <optional>
#include <utility>

#include "rrnlab/io.hpp"
#include "rrnlab/reasoner.hpp"
#include "rrnlab/rng.hpp"

namespace rrnlab {

// ---------------------------------------------------------------------------
// family trees

struct FamilyGenConfig {
    int max_people = 26;
    int max_depth = 5;      // generations
    int max_branching = 5;  // children per person
    double stop_probability = 0.02;

    void validate() const;
};

/// Grows a pedigree from a single person: pick a uniform existing person,
/// add a child, or, if they have fewer than two parents, a parent; additions
/// that would break the depth/branching bounds are rejected. Stops at
/// max_people or with stop_probability per successful addition. Facts are
/// one gender class fact per person plus the parentOf edges.
SampleKB generate_family_sample(const FamilyGenConfig& cfg, Rng& rng);

/// The built-in pedigree ontology: 28 derived kinship relations over
/// parentOf and the two gender classes, plus gender disjointness.
const Program& family_ontology();
const std::string& family_ontology_text();

/// Depth (number of generations spanned) of a family sample's parentOf DAG.
int family_tree_depth(const SampleKB& sample);
/// Largest number of children of any single person.
int family_tree_branching(const SampleKB& sample);

// ---------------------------------------------------------------------------
// countries

struct WorldData {
    struct Country {
        std::string name, region, subregion;
    };
    std::vector<Country> countries;
    std::vector<std::pair<std::string, std::string>> neighbors;  // normalized a<b
    std::vector<std::string> regions;     // first-use order
    std::vector<std::string> subregions;  // first-use order

    static WorldData from_tsv(std::string_view text);
    std::string to_tsv() const;

    /// Ring-of-rings synthetic world: countries form a cycle inside each
    /// subregion, subregions are chained into a global cycle, plus a few
    /// random extra borders. Neighborhoods mostly stay inside a subregion,
    /// so locations correlate with the border graph.
    static WorldData synthesize(int n_regions, int subregions_per_region,
                                int countries_per_subregion, std::uint64_t seed);

    void validate() const;
    const Country* find(const std::string& name) const;
};

/// locatedIn transitivity, neighborOf symmetry, class rules for countries,
/// regions and subregions, and pairwise class disjointness.
const Program& countries_ontology();
const std::string& countries_ontology_text();

enum class CountriesVersion { S1, S2, S3 };

std::string to_string(CountriesVersion v);
std::optional<CountriesVersion> countries_version_from_string(const std::string& s);

struct CountriesGenConfig {
    CountriesVersion version = CountriesVersion::S1;
    int n_train = 100;
    int n_test_countries = 20;
    std::uint64_t seed = 0;
};

/// Builds a full dataset directory: an eval and a test sample with two fixed
/// disjoint sets of test countries whose location facts are dropped per
/// version, and n_train training samples drawn from the world with those 40
/// countries removed entirely. Eval/test labels are restricted to queries
/// touching the test countries (plus region/subregion class queries);
/// training labels use the full scope. Labels always come from the
/// undropped facts.
DatasetManifest generate_countries_dataset(const WorldData& world,
                                           const CountriesGenConfig& cfg,
                                           const std::filesystem::path& out_dir);

/// Family dataset directory with train/eval/test splits and full-scope labels.
struct FamilyDatasetConfig {
    FamilyGenConfig family;
    int n_train = 500;
    int n_eval = 50;
    int n_test = 100;
    std::uint64_t seed = 0;
};

DatasetManifest generate_family_dataset(const FamilyDatasetConfig& cfg,
                                        const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------
// real-world style extraction and corruption

struct BfsResult {
    SampleKB sample;
    bool component_exhausted = false;  // fewer reachable individuals than requested
};

/// Breadth-first search over the undirected view of the relation graph from
/// `start` until `n` individuals are discovered (or the component runs out);
/// the sample keeps every dump fact whose constants were all discovered.
/// Neighbor visit order is shuffled per node under `rng`.
BfsResult extract_bfs_subgraph(const SampleKB& dump, const std::string& start,
                               int n, Rng& rng);

/// Corruption negatives: per positive relation query, up to `ratio` corrupted
/// copies with subject or object (fair coin) replaced by a uniform roster
/// individual; candidates whose positive form is labeled true are rejected
/// (retry budget 100 per slot). Results are labeled false.
std::vector<LabeledQuery> sample_negatives(const SampleKB& sample,
                                           std::span<const LabeledQuery> positives,
                                           int ratio, Rng& rng);

/// Removes one uniformly chosen fact that the rest of the knowledge base
/// does not re-derive (oracle-verified). Throws KbError if no fact
/// qualifies.
std::pair<SampleKB, Literal> corrupt_missing(const Program& program,
                                             const SampleKB& sample, Rng& rng);

/// Adds the negation of one uniformly chosen fact; the copy is marked
/// inconsistent-by-construction.
std::pair<SampleKB, Literal> corrupt_conflict(const SampleKB& sample, Rng& rng);

SampleKB clone_sample(const SampleKB& sample);

}  // namespace rrnlab
