#include "rrnlab/rrn.hpp"

#include <algorithm>
#include <cmath>

namespace rrnlab {

namespace {

constexpr double kNormFloor = 1e-12;

double stable_sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow
double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

Vec sigmoid(const Vec& v) {
    Vec out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = stable_sigmoid(v[i]);
    return out;
}

}  // namespace

void Hyperparams::validate() const {
    if (embedding_dim <= 0 || hidden_dim <= 0) throw KbError("dims must be positive");
    if (passes < 1) throw KbError("pass count must be >= 1");
    if (learning_rate <= 0 || init_scale <= 0) throw KbError("rates must be positive");
    if (negative_ratio < 1) throw KbError("negative ratio must be >= 1");
    if (max_facts <= 0) throw KbError("capacity bound must be positive");
}

nlohmann::json Hyperparams::to_json() const {
    return {{"embedding_dim", embedding_dim}, {"hidden_dim", hidden_dim},
            {"passes", passes},               {"learning_rate", learning_rate},
            {"negative_ratio", negative_ratio}, {"init_scale", init_scale},
            {"max_facts", max_facts},         {"clip_norm", clip_norm}};
}

Hyperparams Hyperparams::from_json(const nlohmann::json& j) {
    Hyperparams hp;
    hp.embedding_dim = j.value("embedding_dim", hp.embedding_dim);
    hp.hidden_dim = j.value("hidden_dim", hp.hidden_dim);
    hp.passes = j.value("passes", hp.passes);
    hp.learning_rate = j.value("learning_rate", hp.learning_rate);
    hp.negative_ratio = j.value("negative_ratio", hp.negative_ratio);
    hp.init_scale = j.value("init_scale", hp.init_scale);
    hp.max_facts = j.value("max_facts", hp.max_facts);
    hp.clip_norm = j.value("clip_norm", hp.clip_norm);
    return hp;
}

Parameters::Parameters(VocabularyPtr vocab_in, const Hyperparams& hp)
    : vocab(std::move(vocab_in)), d(hp.embedding_dim), h(hp.hidden_dim) {
    hp.validate();
    Wz = Mat::Zero(d, d + h);
    Wc = Mat::Zero(d, d + h);
    bz = Vec::Zero(d);
    bc = Vec::Zero(d);
    rel_banks.resize(vocab->n_relations() * 2);
    for (auto& bank : rel_banks) {
        bank.W_subj = Mat::Zero(h, 2 * d);
        bank.W_obj = Mat::Zero(h, 2 * d);
        bank.b_subj = Vec::Zero(h);
        bank.b_obj = Vec::Zero(h);
    }
    cls_banks.resize(vocab->n_classes() * 2);
    for (auto& bank : cls_banks) {
        bank.W = Mat::Zero(h, d);
        bank.b = Vec::Zero(h);
    }
    rel_heads.resize(vocab->n_relations());
    for (auto& head : rel_heads) {
        head.W1 = Mat::Zero(h, 2 * d);
        head.b1 = Vec::Zero(h);
        head.w2 = Vec::Zero(h);
        head.b2 = Vec::Zero(1);
    }
    Wq1 = Mat::Zero(h, d);
    bq1 = Vec::Zero(h);
    Wq2 = Mat::Zero(vocab->n_classes(), h);
    bq2 = Vec::Zero(vocab->n_classes());
}

Parameters Parameters::random_init(VocabularyPtr vocab, const Hyperparams& hp,
                                   Rng& rng) {
    Parameters p(std::move(vocab), hp);
    // fan-in scaled Gaussians for weights; biases stay at zero except the
    // gate bias, which starts negative so untrained banks perturb embeddings
    // only gently
    auto fill = [&rng](Mat& m) {
        const double s = 1.0 / std::sqrt(static_cast<double>(m.cols()));
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = s * rng.normal();
    };
    auto fill_vec = [&rng](Vec& v, double s) {
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = s * rng.normal();
    };
    fill(p.Wz);
    fill(p.Wc);
    p.bz.setConstant(-1.0);
    for (auto& bank : p.rel_banks) {
        fill(bank.W_subj);
        fill(bank.W_obj);
    }
    for (auto& bank : p.cls_banks) fill(bank.W);
    for (auto& head : p.rel_heads) {
        fill(head.W1);
        fill_vec(head.w2, 1.0 / std::sqrt(static_cast<double>(head.w2.size())));
    }
    fill(p.Wq1);
    fill(p.Wq2);
    return p;
}

std::size_t Parameters::n_scalars() const {
    std::size_t total = 0;
    for (const auto& view : tensor_views(*this)) total += view.size;
    return total;
}

std::vector<TensorView> tensor_views(Parameters& p) {
    std::vector<TensorView> out;
    auto add_mat = [&](const std::string& name, Mat& m) {
        out.push_back({name, m.data(), static_cast<std::size_t>(m.size())});
    };
    auto add_vec = [&](const std::string& name, Vec& v) {
        out.push_back({name, v.data(), static_cast<std::size_t>(v.size())});
    };
    add_mat("cell.gate.W", p.Wz);
    add_vec("cell.gate.bz", p.bz);
    add_mat("cell.cand.W", p.Wc);
    add_vec("cell.cand.bc", p.bc);
    for (int r = 0; r < p.vocab->n_relations(); ++r)
        for (int neg = 0; neg < 2; ++neg) {
            const std::string base = "msg." + p.vocab->relation_name(r) +
                                     (neg ? ".neg" : ".pos");
            auto& bank = p.rel_banks[r * 2 + neg];
            add_mat(base + ".subj.W", bank.W_subj);
            add_vec(base + ".subj.b", bank.b_subj);
            add_mat(base + ".obj.W", bank.W_obj);
            add_vec(base + ".obj.b", bank.b_obj);
        }
    for (int c = 0; c < p.vocab->n_classes(); ++c)
        for (int neg = 0; neg < 2; ++neg) {
            const std::string base =
                "msg." + p.vocab->class_name(c) + (neg ? ".neg" : ".pos");
            auto& bank = p.cls_banks[c * 2 + neg];
            add_mat(base + ".W", bank.W);
            add_vec(base + ".b", bank.b);
        }
    for (int r = 0; r < p.vocab->n_relations(); ++r) {
        const std::string base = "head." + p.vocab->relation_name(r);
        auto& head = p.rel_heads[r];
        add_mat(base + ".W1", head.W1);
        add_vec(base + ".b1", head.b1);
        add_vec(base + ".w2", head.w2);
        add_vec(base + ".b2", head.b2);
    }
    add_mat("head.class.W1", p.Wq1);
    add_vec("head.class.b1", p.bq1);
    add_mat("head.class.W2", p.Wq2);
    add_vec("head.class.b2", p.bq2);
    return out;
}

std::vector<TensorView> tensor_views(const Parameters& p) {
    return tensor_views(const_cast<Parameters&>(p));
}

EmbeddingMatrix init_embeddings(int n_individuals, const Hyperparams& hp, Rng& rng) {
    if (n_individuals <= 0) throw KbError("cannot embed an empty roster");
    hp.validate();
    Mat e(n_individuals, hp.embedding_dim);
    for (int i = 0; i < n_individuals; ++i)
        for (int k = 0; k < hp.embedding_dim; ++k) e(i, k) = hp.init_scale * rng.normal();
    for (int i = 0; i < n_individuals; ++i) {
        const double norm = std::max(e.row(i).norm(), kNormFloor);
        e.row(i) /= norm;
    }
    return e;
}

// ---------------------------------------------------------------------------
// update cell

namespace {

enum class BankKind { RelSubj, RelObj, Membership };

struct StepSide {
    BankKind kind;
    int bank_index;  // rel_banks / cls_banks index
    Vec m_pre, z, cand, u;
    double norm = 0.0;
};

struct Step {
    int rows[2] = {-1, -1};
    Vec pre[2];
    StepSide sides[2];
    int n_sides = 0;
};

const Mat& side_weight(const Parameters& p, const StepSide& s) {
    switch (s.kind) {
        case BankKind::RelSubj: return p.rel_banks[s.bank_index].W_subj;
        case BankKind::RelObj: return p.rel_banks[s.bank_index].W_obj;
        case BankKind::Membership: return p.cls_banks[s.bank_index].W;
    }
    return p.Wq1;  // unreachable
}

const Vec& side_bias(const Parameters& p, const StepSide& s) {
    switch (s.kind) {
        case BankKind::RelSubj: return p.rel_banks[s.bank_index].b_subj;
        case BankKind::RelObj: return p.rel_banks[s.bank_index].b_obj;
        case BankKind::Membership: return p.cls_banks[s.bank_index].b;
    }
    return p.bq1;  // unreachable
}

Mat& side_weight_grad(Parameters& g, const StepSide& s) {
    switch (s.kind) {
        case BankKind::RelSubj: return g.rel_banks[s.bank_index].W_subj;
        case BankKind::RelObj: return g.rel_banks[s.bank_index].W_obj;
        case BankKind::Membership: return g.cls_banks[s.bank_index].W;
    }
    return g.Wq1;  // unreachable
}

Vec& side_bias_grad(Parameters& g, const StepSide& s) {
    switch (s.kind) {
        case BankKind::RelSubj: return g.rel_banks[s.bank_index].b_subj;
        case BankKind::RelObj: return g.rel_banks[s.bank_index].b_obj;
        case BankKind::Membership: return g.cls_banks[s.bank_index].b;
    }
    return g.bq1;  // unreachable
}

// forward for one side; returns the renormalized row
Vec side_forward(const Parameters& p, StepSide& side, const Vec& e_self,
                 const Vec& e_other) {
    const Mat& Wm = side_weight(p, side);
    const Vec& bm = side_bias(p, side);
    Vec x;
    if (side.kind == BankKind::Membership) {
        x = e_self;
    } else {
        x.resize(e_self.size() + e_other.size());
        x << e_self, e_other;
    }
    side.m_pre = Wm * x + bm;
    const Vec m = side.m_pre.cwiseMax(0.0);
    Vec xz(e_self.size() + m.size());
    xz << e_self, m;
    side.z = sigmoid(p.Wz * xz + p.bz);
    side.cand = (p.Wc * xz + p.bc).array().tanh();
    side.u = (Vec::Ones(e_self.size()) - side.z).cwiseProduct(e_self) +
             side.z.cwiseProduct(side.cand);
    side.norm = std::max(side.u.norm(), kNormFloor);
    return side.u / side.norm;
}

StepSide make_side(const Parameters& p, const Fact& fact, bool object_side) {
    StepSide side;
    if (fact.atom.pred.kind == PredKind::Class) {
        side.kind = BankKind::Membership;
        side.bank_index = fact.atom.pred.id * 2 + (fact.positive ? 0 : 1);
    } else {
        side.kind = object_side ? BankKind::RelObj : BankKind::RelSubj;
        side.bank_index = fact.atom.pred.id * 2 + (fact.positive ? 0 : 1);
    }
    return side;
}

// applies one fact; records the step when a tape is given
void apply_fact(const Parameters& p, EmbeddingMatrix& e, const Fact& fact,
                std::vector<Step>* tape) {
    const int s = fact.atom.subject;
    const int o = fact.atom.object;
    if (fact.atom.pred.kind == PredKind::Class) {
        Step step;
        step.n_sides = 1;
        step.rows[0] = s;
        step.pre[0] = e.row(s);
        step.sides[0] = make_side(p, fact, false);
        e.row(s) = side_forward(p, step.sides[0], step.pre[0], step.pre[0]);
        if (tape) tape->push_back(std::move(step));
        return;
    }
    if (s == o) {
        // reflexive fact: subject side first, then object side on the result
        for (int pass = 0; pass < 2; ++pass) {
            Step step;
            step.n_sides = 1;
            step.rows[0] = s;
            step.pre[0] = e.row(s);
            step.sides[0] = make_side(p, fact, pass == 1);
            e.row(s) = side_forward(p, step.sides[0], step.pre[0], step.pre[0]);
            if (tape) tape->push_back(std::move(step));
        }
        return;
    }
    Step step;
    step.n_sides = 2;
    step.rows[0] = s;
    step.rows[1] = o;
    step.pre[0] = e.row(s);
    step.pre[1] = e.row(o);
    step.sides[0] = make_side(p, fact, false);
    step.sides[1] = make_side(p, fact, true);
    // both sides read the pre-step rows
    const Vec new_s = side_forward(p, step.sides[0], step.pre[0], step.pre[1]);
    const Vec new_o = side_forward(p, step.sides[1], step.pre[1], step.pre[0]);
    e.row(s) = new_s;
    e.row(o) = new_o;
    if (tape) tape->push_back(std::move(step));
}

// backward through one recorded side; accumulates into row gradients and
// parameter gradients
void side_backward(const Parameters& p, const Step& step, int side_index,
                   const Vec& g_after, Parameters& grads, Mat& row_grads) {
    const StepSide& side = step.sides[side_index];
    const int self_row = step.rows[side_index];
    const int other_row = step.n_sides == 2 ? step.rows[1 - side_index] : self_row;
    const Vec& pre_self = step.pre[side_index];
    const Vec& pre_other = step.n_sides == 2 ? step.pre[1 - side_index] : pre_self;
    const int d = static_cast<int>(pre_self.size());

    // e_after = u / norm
    const Vec e_hat = side.u / side.norm;
    const Vec g_u = (g_after - e_hat * g_after.dot(e_hat)) / side.norm;

    const Vec g_z = g_u.cwiseProduct(side.cand - pre_self);
    const Vec g_cand = g_u.cwiseProduct(side.z);
    Vec g_pre_self = g_u.cwiseProduct(Vec::Ones(d) - side.z);

    const Vec g_ac =
        g_cand.cwiseProduct(Vec::Ones(d) - side.cand.cwiseProduct(side.cand));
    const Vec g_az = g_z.cwiseProduct(side.z.cwiseProduct(Vec::Ones(d) - side.z));

    const Vec m = side.m_pre.cwiseMax(0.0);
    Vec xz(d + m.size());
    xz << pre_self, m;

    grads.Wz.noalias() += g_az * xz.transpose();
    grads.bz += g_az;
    grads.Wc.noalias() += g_ac * xz.transpose();
    grads.bc += g_ac;

    const Vec g_xz = p.Wz.transpose() * g_az + p.Wc.transpose() * g_ac;
    g_pre_self += g_xz.head(d);
    Vec g_m = g_xz.tail(m.size());
    for (Eigen::Index i = 0; i < g_m.size(); ++i)
        if (side.m_pre[i] <= 0.0) g_m[i] = 0.0;

    const Mat& Wm = side_weight(p, side);
    if (side.kind == BankKind::Membership) {
        side_weight_grad(grads, side).noalias() += g_m * pre_self.transpose();
        side_bias_grad(grads, side) += g_m;
        g_pre_self += Wm.transpose() * g_m;
        row_grads.row(self_row) += g_pre_self;
    } else {
        Vec x(2 * d);
        x << pre_self, pre_other;
        side_weight_grad(grads, side).noalias() += g_m * x.transpose();
        side_bias_grad(grads, side) += g_m;
        const Vec g_x = Wm.transpose() * g_m;
        g_pre_self += g_x.head(d);
        row_grads.row(self_row) += g_pre_self;
        row_grads.row(other_row) += g_x.tail(d);
    }
}

}  // namespace

struct EncodeTape {
    std::vector<Step> steps;
};

void update_step(const Parameters& params, EmbeddingMatrix& embeddings,
                 const Fact& fact) {
    if (fact.atom.subject < 0 || fact.atom.subject >= embeddings.rows())
        throw KbError("update_step: subject row out of range");
    if (fact.atom.pred.kind == PredKind::Relation &&
        (fact.atom.object < 0 || fact.atom.object >= embeddings.rows()))
        throw KbError("update_step: object row out of range");
    if (fact.atom.pred.kind == PredKind::Relation
            ? fact.atom.pred.id >= params.vocab->n_relations()
            : fact.atom.pred.id >= params.vocab->n_classes())
        throw KbError("update_step: predicate not in vocabulary");
    apply_fact(params, embeddings, fact, nullptr);
}

EmbeddingMatrix encode(const Parameters& params, const SampleKB& sample,
                       const Hyperparams& hp, Rng& rng, EncodeOptions opts) {
    hp.validate();
    if (static_cast<int>(sample.facts().size()) > hp.max_facts)
        throw KbError("sample exceeds the capacity bound: " +
                      std::to_string(sample.facts().size()) + " > " +
                      std::to_string(hp.max_facts));
    EmbeddingMatrix e = opts.initial
                            ? *opts.initial
                            : init_embeddings(sample.n_individuals(), hp, rng);
    if (e.rows() != sample.n_individuals() || e.cols() != hp.embedding_dim)
        throw KbError("initial embedding matrix has the wrong shape");

    std::vector<int> order(sample.facts().size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    for (int pass = 0; pass < hp.passes; ++pass) {
        rng.shuffle(order);
        for (int idx : order)
            apply_fact(params, e, sample.facts()[idx],
                       opts.tape ? &opts.tape->steps : nullptr);
    }
    return e;
}

namespace {

double head_logit(const Parameters& p, const EmbeddingMatrix& e, const GroundAtom& atom) {
    if (atom.pred.kind == PredKind::Class) {
        const Vec hidden = (p.Wq1 * e.row(atom.subject).transpose() + p.bq1).cwiseMax(0.0);
        return p.Wq2.row(atom.pred.id).dot(hidden) + p.bq2[atom.pred.id];
    }
    const auto& head = p.rel_heads[atom.pred.id];
    Vec x(2 * p.d);
    x << e.row(atom.subject).transpose(), e.row(atom.object).transpose();
    const Vec hidden = (head.W1 * x + head.b1).cwiseMax(0.0);
    return head.w2.dot(hidden) + head.b2[0];
}

}  // namespace

double predict(const Parameters& params, const EmbeddingMatrix& embeddings,
               const SampleKB& sample, const Literal& query) {
    Literal positive = query;
    positive.positive = true;
    const GroundAtom atom = sample.intern(positive);
    const double p = stable_sigmoid(head_logit(params, embeddings, atom));
    return query.positive ? p : 1.0 - p;
}

std::vector<double> predict_batch(const Parameters& params,
                                  const EmbeddingMatrix& embeddings,
                                  std::span<const GroundAtom> atoms) {
    std::vector<double> out(atoms.size());
    for (std::size_t i = 0; i < atoms.size(); ++i)
        out[i] = stable_sigmoid(head_logit(params, embeddings, atoms[i]));
    return out;
}

LossResult loss_and_gradients(const Parameters& params, const SampleKB& sample,
                              std::span<const LabeledQuery> queries,
                              const Hyperparams& hp, Rng& rng) {
    if (queries.empty()) throw KbError("loss needs a non-empty query set");

    EncodeTape tape;
    EncodeOptions opts;
    opts.tape = &tape;
    const EmbeddingMatrix e = encode(params, sample, hp, rng, opts);

    LossResult result;
    result.grads = Parameters(params.vocab, hp);
    Mat row_grads = Mat::Zero(e.rows(), e.cols());

    const double inv_n = 1.0 / static_cast<double>(queries.size());
    double loss = 0.0;
    const int d = params.d;

    for (const auto& q : queries) {
        const GroundAtom& atom = q.atom;
        const double y = q.label ? 1.0 : 0.0;
        if (atom.pred.kind == PredKind::Class) {
            const Vec ei = e.row(atom.subject).transpose();
            const Vec pre = params.Wq1 * ei + params.bq1;
            const Vec hidden = pre.cwiseMax(0.0);
            const double logit =
                params.Wq2.row(atom.pred.id).dot(hidden) + params.bq2[atom.pred.id];
            loss += softplus(logit) - y * logit;
            const double dlogit = (stable_sigmoid(logit) - y) * inv_n;
            result.grads.Wq2.row(atom.pred.id) += dlogit * hidden.transpose();
            result.grads.bq2[atom.pred.id] += dlogit;
            Vec g_hidden = params.Wq2.row(atom.pred.id).transpose() * dlogit;
            for (Eigen::Index i = 0; i < g_hidden.size(); ++i)
                if (pre[i] <= 0.0) g_hidden[i] = 0.0;
            result.grads.Wq1.noalias() += g_hidden * ei.transpose();
            result.grads.bq1 += g_hidden;
            row_grads.row(atom.subject) += (params.Wq1.transpose() * g_hidden).transpose();
        } else {
            const auto& head = params.rel_heads[atom.pred.id];
            auto& ghead = result.grads.rel_heads[atom.pred.id];
            Vec x(2 * d);
            x << e.row(atom.subject).transpose(), e.row(atom.object).transpose();
            const Vec pre = head.W1 * x + head.b1;
            const Vec hidden = pre.cwiseMax(0.0);
            const double logit = head.w2.dot(hidden) + head.b2[0];
            loss += softplus(logit) - y * logit;
            const double dlogit = (stable_sigmoid(logit) - y) * inv_n;
            ghead.w2 += dlogit * hidden;
            ghead.b2[0] += dlogit;
            Vec g_hidden = head.w2 * dlogit;
            for (Eigen::Index i = 0; i < g_hidden.size(); ++i)
                if (pre[i] <= 0.0) g_hidden[i] = 0.0;
            ghead.W1.noalias() += g_hidden * x.transpose();
            ghead.b1 += g_hidden;
            const Vec g_x = head.W1.transpose() * g_hidden;
            row_grads.row(atom.subject) += g_x.head(d).transpose();
            row_grads.row(atom.object) += g_x.tail(d).transpose();
        }
    }
    result.loss = loss * inv_n;

    // backprop through every recorded update step, newest first
    for (auto it = tape.steps.rbegin(); it != tape.steps.rend(); ++it) {
        const Step& step = *it;
        Vec g_after[2];
        for (int sidx = 0; sidx < step.n_sides; ++sidx) {
            g_after[sidx] = row_grads.row(step.rows[sidx]).transpose();
            row_grads.row(step.rows[sidx]).setZero();
        }
        for (int sidx = 0; sidx < step.n_sides; ++sidx)
            side_backward(params, step, sidx, g_after[sidx], result.grads, row_grads);
    }
    // row_grads now carries d(loss)/d(initial embeddings); the initialization
    // is not trainable, so it is dropped here.
    return result;
}

void optimizer_step(AdamState& state, Parameters& params, const Parameters& grads,
                    const Hyperparams& hp) {
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;

    auto pviews = tensor_views(params);
    auto gviews = tensor_views(grads);
    auto mviews = tensor_views(state.m);
    auto vviews = tensor_views(state.v);
    if (pviews.size() != gviews.size())
        throw KbError("gradient structure does not match parameters");

    double sq_norm = 0.0;
    for (std::size_t t = 0; t < gviews.size(); ++t) {
        for (std::size_t i = 0; i < gviews[t].size; ++i) {
            const double g = gviews[t].data[i];
            if (!std::isfinite(g))
                throw KbError("non-finite gradient in " + gviews[t].name);
            sq_norm += g * g;
        }
    }
    const double norm = std::sqrt(sq_norm);
    const double scale = norm > hp.clip_norm ? hp.clip_norm / norm : 1.0;

    state.step += 1;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.step));
    const double lr = hp.learning_rate;

    for (std::size_t t = 0; t < pviews.size(); ++t) {
        double* p = pviews[t].data;
        const double* g = gviews[t].data;
        double* m = mviews[t].data;
        double* v = vviews[t].data;
        for (std::size_t i = 0; i < pviews[t].size; ++i) {
            const double gi = g[i] * scale;
            m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * gi;
            v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * gi * gi;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= lr * mhat / (std::sqrt(vhat) + kEps);
            if (!std::isfinite(p[i]))
                throw KbError("non-finite parameter after step in " + pviews[t].name);
        }
    }
}

}  // namespace rrnlab
