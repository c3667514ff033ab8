#pragma once

#include <filesystem>
#include <optional>

#include "rrnlab/checkpoint.hpp"
#include "rrnlab/datagen.hpp"
#include "rrnlab/io.hpp"

namespace rrnlab {

struct PredicateMetrics {
    std::string predicate;
    std::int64_t pos = 0, neg = 0;  // ground-truth support
    std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::optional<double> auc_pr;  // average precision; empty without positives
    std::optional<double> precision, recall, f1;
    double accuracy = 0.0;

    std::int64_t total() const { return pos + neg; }
    std::int64_t correct() const { return tp + tn; }
};

struct BlockMetrics {
    std::string name;
    std::vector<PredicateMetrics> rows;  // vocabulary order
    PredicateMetrics micro;              // pooled counts and pooled ranking
    std::optional<double> macro_accuracy, macro_f1, macro_auc_pr;

    bool empty() const { return micro.total() == 0; }
};

/// Accuracy/F1/AUC-PR per predicate, split into the four blocks of the
/// published tables: specified/inferable x classes/relations. Positive
/// class for precision/recall/F1 is the "true" label; micro pools counts,
/// macro averages the defined per-predicate values.
struct MetricsReport {
    BlockMetrics specified_classes, inferable_classes;
    BlockMetrics specified_relations, inferable_relations;
    double total_accuracy = 0.0;
    std::int64_t total_queries = 0;
    std::int64_t total_correct = 0;

    nlohmann::json to_json() const;
    std::string to_markdown() const;
};

/// Streaming builder: feed (query, probability), read the report off at the
/// end. Insertion order fixes AUC-PR tie-breaking, so feeding order must be
/// deterministic.
class MetricsAccumulator {
public:
    explicit MetricsAccumulator(VocabularyPtr vocab);
    void add(const LabeledQuery& query, double probability);
    MetricsReport finish() const;

private:
    struct Cell {
        std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
        std::vector<std::pair<float, bool>> scored;
    };
    VocabularyPtr vocab_;
    std::vector<Cell> cells_;  // [block][predicate]
    Cell& cell(const LabeledQuery& q);
};

/// Average precision of a ranked list (descending probability, stable on
/// ties). Empty optional when there are no positives.
std::optional<double> average_precision(std::span<const std::pair<float, bool>> scored);

struct TrainConfig {
    Hyperparams hp;
    int max_epochs = 60;
    int patience = 5;             // epochs without eval improvement
    int full_universe_limit = 3000;  // use all labels when a sample has fewer
    std::uint64_t seed = 0;
    int jobs = 1;
    bool quiet = false;
};

struct TrainResult {
    std::filesystem::path checkpoint_path;
    int epochs_run = 0;
    double best_eval_loss = 0.0;
    std::vector<double> train_losses;  // per epoch
};

/// Epoch loop over the training split: per sample encode, build the query
/// set (full labels when small, otherwise positives + all class queries +
/// on-the-fly sampled negatives), backprop, Adam step. Early-stops when the
/// eval-split loss stops improving; the best parameters are saved to
/// `<out_dir>/model.ckpt`.
TrainResult train(const LoadedDataset& dataset, const TrainConfig& cfg,
                  const std::filesystem::path& out_dir,
                  const Checkpoint* resume_from = nullptr);

/// Encodes every sample of the split and scores every labeled query at the
/// 0.5 threshold. Throws on a vocabulary fingerprint mismatch.
MetricsReport evaluate(const Checkpoint& ck, const LoadedDataset& dataset,
                       const std::string& split, std::uint64_t seed, int jobs = 1);

struct ExperimentReport {
    std::string mode;  // "missing" | "conflict"
    std::int64_t samples = 0;
    std::int64_t hits = 0;  // reconstructed / resolved
    double rate = 0.0;
    MetricsReport baseline;
    MetricsReport corrupted;
    double accuracy_delta_points = 0.0;  // baseline - corrupted, in points

    nlohmann::json to_json() const;
};

/// Removes one oracle-verified non-inferable fact per sample, re-encodes,
/// and reports the fraction of removed facts still predicted true plus the
/// metric deltas on the corrupted split.
ExperimentReport run_missing_fact_experiment(const Checkpoint& ck,
                                             const LoadedDataset& dataset,
                                             const std::string& split,
                                             std::uint64_t seed);

/// Adds the negation of one fact per sample; a conflict counts as resolved
/// when the original fact still scores >= 0.5.
ExperimentReport run_conflict_experiment(const Checkpoint& ck,
                                         const LoadedDataset& dataset,
                                         const std::string& split,
                                         std::uint64_t seed);

/// TSV: individual, semicolon-joined true classes, then the embedding
/// values (2 + d columns).
std::string export_embeddings(const Checkpoint& ck, const LoadedSample& sample,
                              std::uint64_t seed);

}  // namespace rrnlab
