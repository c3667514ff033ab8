#pragma once

#include <Eigen/Dense>

#include <json.hpp>

#include "rrnlab/kb.hpp"
#include "rrnlab/rng.hpp"

namespace rrnlab {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct Hyperparams {
    int embedding_dim = 32;  // d
    int hidden_dim = 64;     // h
    int passes = 8;          // T
    double learning_rate = 1e-3;
    int negative_ratio = 4;
    double init_scale = 0.1;   // embedding init stddev
    int max_facts = 100000;    // capacity bound k
    double clip_norm = 5.0;

    void validate() const;
    nlohmann::json to_json() const;
    static Hyperparams from_json(const nlohmann::json& j);
};

/// Per-relation message weights, one bank per (relation, polarity, side);
/// negated predicates get their own banks.
struct RelationBank {
    Mat W_subj, W_obj;  // h x 2d
    Vec b_subj, b_obj;  // h
};

struct ClassBank {
    Mat W;  // h x d
    Vec b;  // h
};

struct RelationHead {
    Mat W1;  // h x 2d
    Vec b1;  // h
    Vec w2;  // h
    Vec b2;  // 1
};

/// All trainable weights of an RRN bound to one vocabulary. The gate and
/// candidate affines of the update cell are shared; messages and query
/// heads are predicate-specific.
struct Parameters {
    VocabularyPtr vocab;
    int d = 0, h = 0;

    Mat Wz, Wc;  // d x (d+h)
    Vec bz, bc;  // d

    std::vector<RelationBank> rel_banks;  // index: relation*2 + (negated?1:0)
    std::vector<ClassBank> cls_banks;     // index: class*2 + (negated?1:0)

    std::vector<RelationHead> rel_heads;  // per relation
    Mat Wq1;  // h x d   class head trunk
    Vec bq1;  // h
    Mat Wq2;  // N_C x h class output rows
    Vec bq2;  // N_C

    Parameters() = default;
    /// zero-valued parameters with shapes from (vocab, hp)
    Parameters(VocabularyPtr vocab, const Hyperparams& hp);
    static Parameters random_init(VocabularyPtr vocab, const Hyperparams& hp, Rng& rng);

    const RelationBank& rel_bank(int relation, bool negated) const {
        return rel_banks[relation * 2 + (negated ? 1 : 0)];
    }
    const ClassBank& cls_bank(int cls, bool negated) const {
        return cls_banks[cls * 2 + (negated ? 1 : 0)];
    }

    std::size_t n_scalars() const;
};

/// Flat views over every tensor in a fixed, deterministic order; parameters
/// and their gradients zip index-for-index.
struct TensorView {
    std::string name;
    double* data;
    std::size_t size;
};
std::vector<TensorView> tensor_views(Parameters& p);
std::vector<TensorView> tensor_views(const Parameters& p);  // const-casted data

/// One embedding row per roster individual; rows are unit-norm after
/// initialization and after every update step.
using EmbeddingMatrix = Mat;

/// Rows drawn i.i.d. Gaussian(0, init_scale^2), then normalized.
EmbeddingMatrix init_embeddings(int n_individuals, const Hyperparams& hp, Rng& rng);

struct EncodeTape;  // opaque; defined in rrn.cpp

struct EncodeOptions {
    const EmbeddingMatrix* initial = nullptr;  // overrides the random init
    EncodeTape* tape = nullptr;                // records steps for backprop
};

/// Applies the gated update for one fact triple to the embedding matrix:
/// both endpoint rows for a relation fact (simultaneous reads; a reflexive
/// fact applies subject then object side), only the subject row for a
/// membership fact. All other rows are untouched.
void update_step(const Parameters& params, EmbeddingMatrix& embeddings,
                 const Fact& fact);

/// init + T passes; every pass visits each fact exactly once in a freshly
/// shuffled order, applying update_step sequentially.
EmbeddingMatrix encode(const Parameters& params, const SampleKB& sample,
                       const Hyperparams& hp, Rng& rng, EncodeOptions opts = {});

/// P(query true): logistic over the relation head on [e_s; e_o], or the
/// class head on e_i. Negated queries return 1 - p of their positive form.
double predict(const Parameters& params, const EmbeddingMatrix& embeddings,
               const SampleKB& sample, const Literal& query);

/// Batched positive-form probabilities for a list of ground atoms.
std::vector<double> predict_batch(const Parameters& params,
                                  const EmbeddingMatrix& embeddings,
                                  std::span<const GroundAtom> atoms);

/// Mean binary cross-entropy over the labeled queries, differentiated
/// through the query heads and all encode passes. Returns the loss and a
/// gradient structure shaped like Parameters.
struct LossResult {
    double loss = 0.0;
    Parameters grads;
};
LossResult loss_and_gradients(const Parameters& params, const SampleKB& sample,
                              std::span<const LabeledQuery> queries,
                              const Hyperparams& hp, Rng& rng);

/// Adam with global gradient-norm clipping. Deterministic given state;
/// throws KbError naming the tensor on a non-finite gradient.
struct AdamState {
    Parameters m, v;
    long step = 0;

    AdamState() = default;
    AdamState(VocabularyPtr vocab, const Hyperparams& hp) : m(vocab, hp), v(vocab, hp) {}
};
void optimizer_step(AdamState& state, Parameters& params, const Parameters& grads,
                    const Hyperparams& hp);

}  // namespace rrnlab
