#include "rrnlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <numeric>
#include <sstream>
#include <thread>

namespace rrnlab {

namespace {

int block_index(const LabeledQuery& q) {
    const int specified = q.origin == QueryOrigin::Specified ? 0 : 1;
    const int relation = q.group() == QueryGroup::Relation ? 1 : 0;
    return relation * 2 + specified;  // 0 sc, 1 ic, 2 sr, 3 ir
}

std::optional<double> safe_div(std::int64_t num, std::int64_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

void fill_derived(PredicateMetrics& m) {
    m.pos = m.tp + m.fn;
    m.neg = m.tn + m.fp;
    m.accuracy = m.total() > 0
                     ? static_cast<double>(m.correct()) / static_cast<double>(m.total())
                     : 0.0;
    m.precision = safe_div(m.tp, m.tp + m.fp);
    m.recall = safe_div(m.tp, m.tp + m.fn);
    if (m.precision && m.recall && (*m.precision + *m.recall) > 0)
        m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
    else if (m.precision && m.recall)
        m.f1 = 0.0;
}

nlohmann::json opt_json(const std::optional<double>& v) {
    if (!v) return nullptr;
    return *v;
}

nlohmann::json predicate_json(const PredicateMetrics& m) {
    return {{"predicate", m.predicate}, {"auc_pr", opt_json(m.auc_pr)},
            {"precision", opt_json(m.precision)}, {"recall", opt_json(m.recall)},
            {"accuracy", m.accuracy},   {"f1", opt_json(m.f1)},
            {"pos", m.pos},             {"neg", m.neg}};
}

std::string fmt3(const std::optional<double>& v) {
    if (!v) return "---";
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.3f", *v);
    return buf;
}

}  // namespace

std::optional<double> average_precision(
    std::span<const std::pair<float, bool>> scored) {
    std::vector<std::size_t> order(scored.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scored[a].first > scored[b].first;
    });
    std::int64_t positives = 0;
    for (const auto& [p, y] : scored) positives += y ? 1 : 0;
    if (positives == 0) return std::nullopt;
    double sum = 0.0;
    std::int64_t tp = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        if (!scored[order[rank]].second) continue;
        ++tp;
        sum += static_cast<double>(tp) / static_cast<double>(rank + 1);
    }
    return sum / static_cast<double>(positives);
}

MetricsAccumulator::MetricsAccumulator(VocabularyPtr vocab) : vocab_(std::move(vocab)) {
    const int preds = vocab_->n_classes() + vocab_->n_relations();
    cells_.resize(4 * preds);
}

MetricsAccumulator::Cell& MetricsAccumulator::cell(const LabeledQuery& q) {
    const int preds = vocab_->n_classes() + vocab_->n_relations();
    const int pred_index = q.atom.pred.kind == PredKind::Class
                               ? q.atom.pred.id
                               : vocab_->n_classes() + q.atom.pred.id;
    return cells_[block_index(q) * preds + pred_index];
}

void MetricsAccumulator::add(const LabeledQuery& q, double probability) {
    Cell& c = cell(q);
    const bool predicted = probability >= 0.5;
    if (predicted && q.label) ++c.tp;
    if (predicted && !q.label) ++c.fp;
    if (!predicted && q.label) ++c.fn;
    if (!predicted && !q.label) ++c.tn;
    c.scored.emplace_back(static_cast<float>(probability), q.label);
}

MetricsReport MetricsAccumulator::finish() const {
    MetricsReport report;
    BlockMetrics* blocks[4] = {&report.specified_classes, &report.inferable_classes,
                               &report.specified_relations,
                               &report.inferable_relations};
    blocks[0]->name = "specified classes";
    blocks[1]->name = "inferable classes";
    blocks[2]->name = "specified relations";
    blocks[3]->name = "inferable relations";

    const int preds = vocab_->n_classes() + vocab_->n_relations();
    for (int b = 0; b < 4; ++b) {
        BlockMetrics& block = *blocks[b];
        std::vector<std::pair<float, bool>> pooled;
        double acc_sum = 0, f1_sum = 0, ap_sum = 0;
        int acc_n = 0, f1_n = 0, ap_n = 0;
        for (int p = 0; p < preds; ++p) {
            const Cell& c = cells_[b * preds + p];
            if (c.tp + c.fp + c.tn + c.fn == 0) continue;
            PredicateMetrics m;
            m.predicate = p < vocab_->n_classes()
                              ? vocab_->class_name(p)
                              : vocab_->relation_name(p - vocab_->n_classes());
            m.tp = c.tp;
            m.fp = c.fp;
            m.tn = c.tn;
            m.fn = c.fn;
            fill_derived(m);
            m.auc_pr = average_precision(c.scored);
            block.micro.tp += c.tp;
            block.micro.fp += c.fp;
            block.micro.tn += c.tn;
            block.micro.fn += c.fn;
            pooled.insert(pooled.end(), c.scored.begin(), c.scored.end());
            acc_sum += m.accuracy;
            ++acc_n;
            if (m.f1) {
                f1_sum += *m.f1;
                ++f1_n;
            }
            if (m.auc_pr) {
                ap_sum += *m.auc_pr;
                ++ap_n;
            }
            block.rows.push_back(std::move(m));
        }
        block.micro.predicate = "micro";
        fill_derived(block.micro);
        block.micro.auc_pr = average_precision(pooled);
        if (acc_n > 0) block.macro_accuracy = acc_sum / acc_n;
        if (f1_n > 0) block.macro_f1 = f1_sum / f1_n;
        if (ap_n > 0) block.macro_auc_pr = ap_sum / ap_n;

        report.total_queries += block.micro.total();
        report.total_correct += block.micro.correct();
    }
    report.total_accuracy =
        report.total_queries > 0
            ? static_cast<double>(report.total_correct) /
                  static_cast<double>(report.total_queries)
            : 0.0;
    return report;
}

nlohmann::json MetricsReport::to_json() const {
    auto block_json = [](const BlockMetrics& b) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& r : b.rows) rows.push_back(predicate_json(r));
        return nlohmann::json{
            {"rows", rows},
            {"micro", predicate_json(b.micro)},
            {"macro",
             {{"accuracy", opt_json(b.macro_accuracy)},
              {"f1", opt_json(b.macro_f1)},
              {"auc_pr", opt_json(b.macro_auc_pr)}}}};
    };
    return {{"blocks",
             {{"specified_classes", block_json(specified_classes)},
              {"inferable_classes", block_json(inferable_classes)},
              {"specified_relations", block_json(specified_relations)},
              {"inferable_relations", block_json(inferable_relations)}}},
            {"total",
             {{"accuracy", total_accuracy},
              {"queries", total_queries},
              {"correct", total_correct}}}};
}

std::string MetricsReport::to_markdown() const {
    std::ostringstream out;
    const BlockMetrics* blocks[4] = {&specified_classes, &inferable_classes,
                                     &specified_relations, &inferable_relations};
    for (const auto* block : blocks) {
        if (block->empty()) continue;
        out << "### Results for " << block->name << "\n\n";
        out << "| # | predicate | AUC-PR | precision | recall | accuracy | F1 | pos/neg |\n";
        out << "|---|-----------|--------|-----------|--------|----------|----|---------|\n";
        int index = 0;
        for (const auto& r : block->rows) {
            out << "| " << index++ << " | " << r.predicate << " | " << fmt3(r.auc_pr)
                << " | " << fmt3(r.precision) << " | " << fmt3(r.recall) << " | "
                << fmt3(r.accuracy) << " | " << fmt3(r.f1) << " | " << r.pos << " / "
                << r.neg << " |\n";
        }
        out << "| | micro | " << fmt3(block->micro.auc_pr) << " | "
            << fmt3(block->micro.precision) << " | " << fmt3(block->micro.recall)
            << " | " << fmt3(block->micro.accuracy) << " | " << fmt3(block->micro.f1)
            << " | " << block->micro.pos << " / " << block->micro.neg << " |\n";
        out << "| | macro | " << fmt3(block->macro_auc_pr) << " | --- | --- | "
            << fmt3(block->macro_accuracy) << " | " << fmt3(block->macro_f1)
            << " | |\n\n";
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "Total accuracy: %.4f over %lld queries\n",
                  total_accuracy, static_cast<long long>(total_queries));
    out << buf;
    return out.str();
}

// ---------------------------------------------------------------------------
// training

namespace {

std::vector<LabeledQuery> training_queries(const LoadedSample& sample,
                                           const TrainConfig& cfg, Rng& neg_rng) {
    if (static_cast<int>(sample.labels.size()) <= cfg.full_universe_limit)
        return sample.labels;
    // positives, every class query, and fresh corruption negatives
    std::vector<LabeledQuery> out;
    std::vector<LabeledQuery> positives;
    for (const auto& q : sample.labels) {
        if (q.group() == QueryGroup::Class)
            out.push_back(q);
        else if (q.label)
            positives.push_back(q);
    }
    const auto negatives = sample_negatives(sample.facts, sample.labels,
                                            cfg.hp.negative_ratio, neg_rng);
    out.insert(out.end(), positives.begin(), positives.end());
    out.insert(out.end(), negatives.begin(), negatives.end());
    return out;
}

double split_loss(const Parameters& params, const Hyperparams& hp,
                  const std::vector<LoadedSample>& samples, std::uint64_t seed) {
    double total = 0.0;
    std::int64_t count = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        Rng rng(derive_seed(seed, 0xE7A1, i));
        const EmbeddingMatrix e = encode(params, samples[i].facts, hp, rng);
        std::vector<GroundAtom> atoms;
        atoms.reserve(samples[i].labels.size());
        for (const auto& q : samples[i].labels) atoms.push_back(q.atom);
        const auto probs = predict_batch(params, e, atoms);
        for (std::size_t k = 0; k < probs.size(); ++k) {
            const double p = std::clamp(probs[k], 1e-12, 1.0 - 1e-12);
            total += samples[i].labels[k].label ? -std::log(p) : -std::log1p(-p);
        }
        count += static_cast<std::int64_t>(probs.size());
    }
    return count > 0 ? total / static_cast<double>(count) : 0.0;
}

}  // namespace

TrainResult train(const LoadedDataset& dataset, const TrainConfig& cfg,
                  const std::filesystem::path& out_dir,
                  const Checkpoint* resume_from) {
    cfg.hp.validate();
    const auto train_it = dataset.splits.find("train");
    if (train_it == dataset.splits.end() || train_it->second.empty())
        throw KbError("training split is empty");
    const auto& train_samples = train_it->second;
    const auto eval_it = dataset.splits.find("eval");
    const std::vector<LoadedSample>* eval_samples =
        eval_it != dataset.splits.end() && !eval_it->second.empty() ? &eval_it->second
                                                                    : nullptr;

    VocabularyPtr vocab = dataset.program.vocab_ptr();
    Hyperparams hp = cfg.hp;
    Parameters params;
    AdamState adam;
    int start_epoch = 0;
    if (resume_from) {
        if (resume_from->vocab_fingerprint() != vocab->fingerprint())
            throw KbError("checkpoint vocabulary does not match the dataset");
        hp = resume_from->hp;
        params = resume_from->params;
        params.vocab = vocab;
        adam = resume_from->adam ? *resume_from->adam : AdamState(vocab, hp);
        start_epoch = resume_from->epoch;
    } else {
        Rng init_rng(derive_seed(cfg.seed, 0x1217));
        params = Parameters::random_init(vocab, hp, init_rng);
        adam = AdamState(vocab, hp);
    }

    TrainResult result;
    double best_eval = std::numeric_limits<double>::infinity();
    Parameters best_params = params;
    int best_epoch = start_epoch;
    int stale = 0;

    for (int epoch = start_epoch; epoch < cfg.max_epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (std::size_t i = 0; i < train_samples.size(); ++i) {
            Rng neg_rng(derive_seed(cfg.seed, 0x9e6, epoch, i));
            const auto queries = training_queries(train_samples[i], cfg, neg_rng);
            Rng enc_rng(derive_seed(cfg.seed, 0xE2C, epoch, i));
            const LossResult r = loss_and_gradients(params, train_samples[i].facts,
                                                    queries, hp, enc_rng);
            optimizer_step(adam, params, r.grads, hp);
            epoch_loss += r.loss;
        }
        epoch_loss /= static_cast<double>(train_samples.size());
        result.train_losses.push_back(epoch_loss);

        double eval_loss = epoch_loss;
        if (eval_samples) eval_loss = split_loss(params, hp, *eval_samples, cfg.seed);
        if (!cfg.quiet)
            std::cerr << "[rrnlab] epoch " << epoch << " train_loss " << epoch_loss
                      << " eval_loss " << eval_loss << "\n";

        if (eval_loss < best_eval - 1e-5) {
            best_eval = eval_loss;
            best_params = params;
            best_epoch = epoch;
            stale = 0;
        } else if (++stale >= cfg.patience) {
            result.epochs_run = epoch + 1;
            break;
        }
        result.epochs_run = epoch + 1;
    }

    Checkpoint ck;
    ck.hp = hp;
    ck.params = std::move(best_params);
    ck.adam = std::move(adam);
    ck.epoch = result.epochs_run;
    ck.extra = {{"dataset", dataset.manifest.name},
                {"dataset_version", dataset.manifest.version},
                {"seed", cfg.seed},
                {"best_epoch", best_epoch},
                {"best_eval_loss", best_eval}};
    result.checkpoint_path = out_dir / "model.ckpt";
    save_checkpoint(result.checkpoint_path, ck);
    result.best_eval_loss = best_eval;
    return result;
}

// ---------------------------------------------------------------------------
// evaluation

namespace {

void check_vocab(const Checkpoint& ck, const LoadedDataset& dataset) {
    if (ck.vocab_fingerprint() != dataset.program.vocab().fingerprint())
        throw KbError("checkpoint vocabulary fingerprint does not match the dataset");
}

std::vector<double> sample_probabilities(const Checkpoint& ck,
                                         const LoadedSample& sample,
                                         std::uint64_t seed, std::size_t index) {
    Rng rng(derive_seed(seed, 0xEA7, index));
    const EmbeddingMatrix e = encode(ck.params, sample.facts, ck.hp, rng);
    std::vector<GroundAtom> atoms;
    atoms.reserve(sample.labels.size());
    for (const auto& q : sample.labels) atoms.push_back(q.atom);
    return predict_batch(ck.params, e, atoms);
}

MetricsReport evaluate_samples(const Checkpoint& ck, VocabularyPtr vocab,
                               const std::vector<LoadedSample>& samples,
                               std::uint64_t seed, int jobs) {
    std::vector<std::vector<double>> all_probs(samples.size());
    if (jobs <= 1 || samples.size() <= 1) {
        for (std::size_t i = 0; i < samples.size(); ++i)
            all_probs[i] = sample_probabilities(ck, samples[i], seed, i);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= samples.size()) break;
                all_probs[i] = sample_probabilities(ck, samples[i], seed, i);
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    // ordered reduction keeps AUC-PR tie-breaking deterministic
    MetricsAccumulator acc(vocab);
    for (std::size_t i = 0; i < samples.size(); ++i)
        for (std::size_t k = 0; k < samples[i].labels.size(); ++k)
            acc.add(samples[i].labels[k], all_probs[i][k]);
    return acc.finish();
}

}  // namespace

MetricsReport evaluate(const Checkpoint& ck, const LoadedDataset& dataset,
                       const std::string& split, std::uint64_t seed, int jobs) {
    check_vocab(ck, dataset);
    const auto it = dataset.splits.find(split);
    if (it == dataset.splits.end() || it->second.empty())
        throw KbError("split not found or empty: " + split);
    return evaluate_samples(ck, dataset.program.vocab_ptr(), it->second, seed, jobs);
}

// ---------------------------------------------------------------------------
// robustness experiments

nlohmann::json ExperimentReport::to_json() const {
    return {{"mode", mode},
            {"samples", samples},
            {"hits", hits},
            {"rate", rate},
            {"baseline", baseline.to_json()},
            {"corrupted", corrupted.to_json()},
            {"accuracy_delta_points", accuracy_delta_points}};
}

namespace {

ExperimentReport run_corruption(const Checkpoint& ck, const LoadedDataset& dataset,
                                const std::string& split, std::uint64_t seed,
                                bool missing) {
    check_vocab(ck, dataset);
    const auto it = dataset.splits.find(split);
    if (it == dataset.splits.end() || it->second.empty())
        throw KbError("split not found or empty: " + split);
    const auto& samples = it->second;
    VocabularyPtr vocab = dataset.program.vocab_ptr();

    ExperimentReport report;
    report.mode = missing ? "missing" : "conflict";

    MetricsAccumulator baseline_acc(vocab);
    MetricsAccumulator corrupted_acc(vocab);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const LoadedSample& sample = samples[i];
        Rng corrupt_rng(derive_seed(seed, 0xBAD, i));
        SampleKB corrupted(vocab);
        Literal target;
        if (missing) {
            auto [kb, removed] =
                corrupt_missing(dataset.program, sample.facts, corrupt_rng);
            corrupted = std::move(kb);
            target = std::move(removed);
        } else {
            auto [kb, conflicted] = corrupt_conflict(sample.facts, corrupt_rng);
            corrupted = std::move(kb);
            target = std::move(conflicted);
        }

        // baseline and corrupted encodes share the seed stream, so the only
        // difference is the corruption itself
        const auto base_probs = sample_probabilities(ck, sample, seed, i);
        LoadedSample corrupted_sample{sample.file, std::move(corrupted), sample.labels};
        const auto corr_probs = sample_probabilities(ck, corrupted_sample, seed, i);
        for (std::size_t k = 0; k < sample.labels.size(); ++k) {
            baseline_acc.add(sample.labels[k], base_probs[k]);
            corrupted_acc.add(sample.labels[k], corr_probs[k]);
        }

        // hit: the corrupted encode still believes the original fact
        Rng hit_rng(derive_seed(seed, 0x417, i));
        const EmbeddingMatrix e =
            encode(ck.params, corrupted_sample.facts, ck.hp, hit_rng);
        const double p = predict(ck.params, e, corrupted_sample.facts, target);
        report.hits += p >= 0.5 ? 1 : 0;
        report.samples += 1;
    }
    report.baseline = baseline_acc.finish();
    report.corrupted = corrupted_acc.finish();
    report.rate = report.samples > 0
                      ? static_cast<double>(report.hits) /
                            static_cast<double>(report.samples)
                      : 0.0;
    report.accuracy_delta_points =
        100.0 * (report.baseline.total_accuracy - report.corrupted.total_accuracy);
    return report;
}

}  // namespace

ExperimentReport run_missing_fact_experiment(const Checkpoint& ck,
                                             const LoadedDataset& dataset,
                                             const std::string& split,
                                             std::uint64_t seed) {
    return run_corruption(ck, dataset, split, seed, true);
}

ExperimentReport run_conflict_experiment(const Checkpoint& ck,
                                         const LoadedDataset& dataset,
                                         const std::string& split,
                                         std::uint64_t seed) {
    return run_corruption(ck, dataset, split, seed, false);
}

std::string export_embeddings(const Checkpoint& ck, const LoadedSample& sample,
                              std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0xE77B));
    const EmbeddingMatrix e = encode(ck.params, sample.facts, ck.hp, rng);
    const auto& vocab = *ck.params.vocab;

    // true classes per individual, from the labels
    std::vector<std::string> classes(sample.facts.n_individuals());
    for (const auto& q : sample.labels) {
        if (q.group() != QueryGroup::Class || !q.label) continue;
        auto& s = classes[q.atom.subject];
        if (!s.empty()) s += ';';
        s += vocab.class_name(q.atom.pred.id);
    }

    std::ostringstream out;
    for (int i = 0; i < sample.facts.n_individuals(); ++i) {
        out << sample.facts.individual_name(i) << '\t'
            << (classes[i].empty() ? "-" : classes[i]);
        for (int k = 0; k < e.cols(); ++k) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.8g", e(i, k));
            out << '\t' << buf;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace rrnlab
