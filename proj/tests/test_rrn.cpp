#include <doctest.h>

#include <filesystem>

#include "helpers.hpp"
#include "rrnlab/checkpoint.hpp"
#include "rrnlab/datagen.hpp"
#include "rrnlab/rrn.hpp"

using namespace rrnlab;

namespace {

Hyperparams micro_hp() {
    Hyperparams hp;
    hp.embedding_dim = 4;
    hp.hidden_dim = 6;
    hp.passes = 2;
    return hp;
}

/// Tiny random KB plus a labeled query set for gradient checking.
struct MicroKb {
    VocabularyPtr vocab;
    SampleKB sample;
    std::vector<LabeledQuery> queries;
};

MicroKb micro_kb(std::uint64_t seed, int n_individuals = 3) {
    auto vocab = std::make_shared<Vocabulary>();
    vocab->add_class("k0");
    vocab->add_class("k1");
    vocab->add_relation("p0");
    vocab->add_relation("p1");
    MicroKb out{vocab, SampleKB(vocab), {}};
    Rng rng(derive_seed(seed, 0xfeed));
    for (int i = 0; i < n_individuals; ++i)
        out.sample.add_individual("x" + std::to_string(i));
    const int n_facts = 3 + static_cast<int>(rng.uniform_int(4));
    for (int f = 0; f < n_facts; ++f) {
        const bool positive = rng.bernoulli(0.8);
        if (rng.bernoulli(0.4)) {
            const GroundAtom atom = GroundAtom::cls(
                static_cast<int>(rng.uniform_int(2)),
                static_cast<int>(rng.uniform_int(n_individuals)));
            if (!out.sample.has_any_polarity(atom)) out.sample.add_fact(atom, positive);
        } else {
            // reflexive pairs allowed on purpose: they take the sequential path
            const GroundAtom atom = GroundAtom::rel(
                static_cast<int>(rng.uniform_int(2)),
                static_cast<int>(rng.uniform_int(n_individuals)),
                static_cast<int>(rng.uniform_int(n_individuals)));
            if (!out.sample.has_any_polarity(atom)) out.sample.add_fact(atom, positive);
        }
    }
    for (int q = 0; q < 6; ++q) {
        GroundAtom atom =
            rng.bernoulli(0.5)
                ? GroundAtom::cls(static_cast<int>(rng.uniform_int(2)),
                                  static_cast<int>(rng.uniform_int(n_individuals)))
                : GroundAtom::rel(static_cast<int>(rng.uniform_int(2)),
                                  static_cast<int>(rng.uniform_int(n_individuals)),
                                  static_cast<int>(rng.uniform_int(n_individuals)));
        out.queries.push_back({atom, rng.bernoulli(0.5), QueryOrigin::Inferable});
    }
    return out;
}

/// Central finite differences against the analytic gradients. The encode
/// path re-runs with an identical RNG, so the only difference is the probed
/// weight.
void check_gradients(std::uint64_t seed, double rel_tol, double abs_floor) {
    const Hyperparams hp = micro_hp();
    MicroKb kb = micro_kb(seed);
    Rng init_rng(derive_seed(seed, 1));
    Parameters params = Parameters::random_init(kb.vocab, hp, init_rng);

    const std::uint64_t encode_seed = derive_seed(seed, 2);
    Rng rng_a(encode_seed);
    const LossResult analytic =
        loss_and_gradients(params, kb.sample, kb.queries, hp, rng_a);

    auto loss_at = [&](Parameters& probe) {
        Rng rng(encode_seed);
        EncodeTape* no_tape = nullptr;
        (void)no_tape;
        Rng rng2(encode_seed);
        const LossResult r = loss_and_gradients(probe, kb.sample, kb.queries, hp, rng2);
        return r.loss;
    };

    auto pviews = tensor_views(params);
    auto gviews = tensor_views(analytic.grads);
    const double eps = 1e-5;
    int checked = 0;
    for (std::size_t t = 0; t < pviews.size(); ++t) {
        for (std::size_t i = 0; i < pviews[t].size; ++i) {
            double& w = pviews[t].data[i];
            const double saved = w;
            w = saved + eps;
            const double up = loss_at(params);
            w = saved - eps;
            const double down = loss_at(params);
            w = saved;
            const double numeric = (up - down) / (2 * eps);
            const double analytic_g = gviews[t].data[i];
            const double err = std::abs(numeric - analytic_g);
            const double tol = abs_floor + rel_tol * std::max(std::abs(numeric),
                                                              std::abs(analytic_g));
            REQUIRE_MESSAGE(err <= tol, pviews[t].name, "[", i, "]: analytic ",
                            analytic_g, " vs numeric ", numeric);
            ++checked;
        }
    }
    CHECK(checked > 0);
}

}  // namespace

TEST_CASE("embedding initialization") {
    Hyperparams hp = micro_hp();
    Rng rng(7);
    const EmbeddingMatrix e = init_embeddings(10, hp, rng);
    CHECK(e.rows() == 10);
    CHECK(e.cols() == 4);
    for (int i = 0; i < 10; ++i) CHECK(e.row(i).norm() == doctest::Approx(1.0).epsilon(1e-6));

    Rng rng2(7);
    const EmbeddingMatrix e2 = init_embeddings(10, hp, rng2);
    CHECK(e == e2);

    // rows collide only with negligible probability
    hp.embedding_dim = 8;
    Rng rng3(8);
    const EmbeddingMatrix big = init_embeddings(100, hp, rng3);
    for (int i = 0; i < 100; ++i)
        for (int j = i + 1; j < 100; ++j)
            CHECK((big.row(i) - big.row(j)).norm() > 1e-6);

    CHECK_THROWS_AS(init_embeddings(0, hp, rng3), KbError);
}

TEST_CASE("update step locality and normalization") {
    const Hyperparams hp = micro_hp();
    MicroKb kb = micro_kb(3, 4);
    Rng rng(21);
    Parameters params = Parameters::random_init(kb.vocab, hp, rng);
    Rng erng(22);
    EmbeddingMatrix e = init_embeddings(4, hp, erng);
    const EmbeddingMatrix before = e;

    update_step(params, e, {GroundAtom::rel(0, 1, 2), true});
    CHECK(e.row(0) == before.row(0));
    CHECK(e.row(3) == before.row(3));
    CHECK(e.row(1) != before.row(1));
    CHECK(e.row(2) != before.row(2));
    for (int i = 0; i < 4; ++i)
        CHECK(e.row(i).norm() == doctest::Approx(1.0).epsilon(1e-9));

    SUBCASE("membership updates touch only the subject") {
        EmbeddingMatrix e2 = before;
        update_step(params, e2, {GroundAtom::cls(1, 2), true});
        CHECK(e2.row(0) == before.row(0));
        CHECK(e2.row(1) == before.row(1));
        CHECK(e2.row(2) != before.row(2));
    }

    SUBCASE("unknown predicate or row is rejected") {
        EmbeddingMatrix e2 = before;
        CHECK_THROWS_AS(update_step(params, e2, {GroundAtom::rel(9, 0, 1), true}),
                        KbError);
        CHECK_THROWS_AS(update_step(params, e2, {GroundAtom::rel(0, 0, 9), true}),
                        KbError);
    }
}

TEST_CASE("zero parameters leave rows unchanged") {
    // with all-zero weights and biases: gate = 0.5, candidate = tanh(0) = 0,
    // so u = e/2 and renormalization restores e exactly
    const Hyperparams hp = micro_hp();
    auto vocab = micro_kb(0).vocab;
    Parameters zero(vocab, hp);
    Rng erng(5);
    EmbeddingMatrix e = init_embeddings(3, hp, erng);
    const EmbeddingMatrix before = e;
    update_step(zero, e, {GroundAtom::rel(0, 0, 1), true});
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < hp.embedding_dim; ++k)
            CHECK(e(i, k) == doctest::Approx(before(i, k)).epsilon(1e-12));
}

TEST_CASE("encode contract") {
    Hyperparams hp = micro_hp();
    MicroKb kb = micro_kb(11);
    Rng prng(31);
    Parameters params = Parameters::random_init(kb.vocab, hp, prng);

    SUBCASE("T=0 is rejected") {
        hp.passes = 0;
        Rng rng(1);
        CHECK_THROWS_AS(encode(params, kb.sample, hp, rng), KbError);
    }

    SUBCASE("T=1 visits each fact once, in the shuffled order") {
        hp.passes = 1;
        Rng rng(42);
        const EmbeddingMatrix e = encode(params, kb.sample, hp, rng);
        // replay manually with the same rng stream
        Rng rng2(42);
        EmbeddingMatrix manual =
            init_embeddings(kb.sample.n_individuals(), hp, rng2);
        std::vector<int> order(kb.sample.facts().size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        rng2.shuffle(order);
        for (int idx : order) update_step(params, manual, kb.sample.facts()[idx]);
        CHECK(e == manual);
    }

    SUBCASE("fixed seed gives identical matrices") {
        Rng a(9), b(9);
        CHECK(encode(params, kb.sample, hp, a) == encode(params, kb.sample, hp, b));
    }

    SUBCASE("capacity bound is enforced") {
        hp.max_facts = 2;
        Rng rng(1);
        CHECK_THROWS_WITH_AS(encode(params, kb.sample, hp, rng),
                             doctest::Contains("capacity"), KbError);
    }
}

TEST_CASE("prediction properties") {
    const Hyperparams hp = micro_hp();
    MicroKb kb = micro_kb(13);
    Rng prng(33);
    Parameters params = Parameters::random_init(kb.vocab, hp, prng);
    Rng rng(2);
    const EmbeddingMatrix e = encode(params, kb.sample, hp, rng);

    for (const auto& pred : {"p0", "p1"}) {
        const Literal pos{true, pred, {"x0", "x1"}};
        const Literal neg{false, pred, {"x0", "x1"}};
        const double pp = predict(params, e, kb.sample, pos);
        CHECK(pp > 0.0);
        CHECK(pp < 1.0);
        CHECK(predict(params, e, kb.sample, neg) == 1.0 - pp);
    }
    const Literal cls_pos{true, "k0", {"x2"}};
    const Literal cls_neg{false, "k0", {"x2"}};
    CHECK(predict(params, e, kb.sample, cls_neg) ==
          1.0 - predict(params, e, kb.sample, cls_pos));
}

TEST_CASE("loss values at known operating points") {
    const Hyperparams hp = micro_hp();
    MicroKb kb = micro_kb(17);

    SUBCASE("all-zero heads answer 0.5, so loss is ln 2") {
        Parameters zero(kb.vocab, hp);
        Rng rng(3);
        const LossResult r = loss_and_gradients(zero, kb.sample, kb.queries, hp, rng);
        CHECK(r.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    }

    SUBCASE("confident correct predictions drive the loss toward zero") {
        Rng prng(4);
        Parameters params = Parameters::random_init(kb.vocab, hp, prng);
        // saturate the relation-head output bias toward the label of a
        // single query
        std::vector<LabeledQuery> one = {{GroundAtom::rel(0, 0, 1), true,
                                          QueryOrigin::Inferable}};
        params.rel_heads[0].b2[0] = 30.0;
        Rng rng(5);
        const LossResult r = loss_and_gradients(params, kb.sample, one, hp, rng);
        CHECK(r.loss < 1e-9);
    }

    SUBCASE("empty query set is rejected") {
        Parameters zero(kb.vocab, hp);
        Rng rng(6);
        CHECK_THROWS_AS(loss_and_gradients(zero, kb.sample, {}, hp, rng), KbError);
    }
}

TEST_CASE("analytic gradients match central finite differences") {
    // two micro KBs here; the acceptance suite runs ten
    check_gradients(101, 1e-3, 1e-6);
    check_gradients(202, 1e-3, 1e-6);
}

TEST_CASE("permuting ids and initial rows leaves probabilities unchanged") {
    const Hyperparams hp = micro_hp();
    MicroKb kb = micro_kb(19, 5);
    Rng prng(51);
    Parameters params = Parameters::random_init(kb.vocab, hp, prng);

    const int n = kb.sample.n_individuals();
    // permutation pi maps old id -> new id
    std::vector<int> pi = {3, 0, 4, 1, 2};

    SampleKB permuted(kb.vocab);
    std::vector<std::string> names(n);
    for (int i = 0; i < n; ++i) names[pi[i]] = kb.sample.individual_name(i);
    for (const auto& name : names) permuted.add_individual(name);
    for (const auto& f : kb.sample.facts()) {
        GroundAtom atom = f.atom;
        atom.subject = pi[atom.subject];
        if (atom.pred.kind == PredKind::Relation) atom.object = pi[atom.object];
        permuted.add_fact(atom, f.positive);
    }

    Rng seed_rng(77);
    const EmbeddingMatrix e0 = init_embeddings(n, hp, seed_rng);
    EmbeddingMatrix e0_perm(n, hp.embedding_dim);
    for (int i = 0; i < n; ++i) e0_perm.row(pi[i]) = e0.row(i);

    // identical pass shuffles: facts are aligned index-for-index
    Rng enc_a(123), enc_b(123);
    EncodeOptions opt_a, opt_b;
    opt_a.initial = &e0;
    opt_b.initial = &e0_perm;
    const EmbeddingMatrix ea = encode(params, kb.sample, hp, enc_a, opt_a);
    const EmbeddingMatrix eb = encode(params, permuted, hp, enc_b, opt_b);

    for (int q = 0; q < 20; ++q) {
        Rng qr(derive_seed(500, q));
        GroundAtom atom =
            qr.bernoulli(0.5)
                ? GroundAtom::cls(static_cast<int>(qr.uniform_int(2)),
                                  static_cast<int>(qr.uniform_int(n)))
                : GroundAtom::rel(static_cast<int>(qr.uniform_int(2)),
                                  static_cast<int>(qr.uniform_int(n)),
                                  static_cast<int>(qr.uniform_int(n)));
        GroundAtom mapped = atom;
        mapped.subject = pi[mapped.subject];
        if (mapped.pred.kind == PredKind::Relation) mapped.object = pi[mapped.object];
        const double pa = predict_batch(params, ea, {{atom}})[0];
        const double pb = predict_batch(params, eb, {{mapped}})[0];
        CHECK(pa == doctest::Approx(pb).epsilon(1e-9));
    }
}

TEST_CASE("optimizer behavior") {
    const Hyperparams hp = micro_hp();
    auto vocab = micro_kb(0).vocab;

    SUBCASE("zero gradient leaves fresh parameters unchanged") {
        Rng prng(61);
        Parameters params = Parameters::random_init(vocab, hp, prng);
        const Parameters before = params;
        Parameters zero_grads(vocab, hp);
        AdamState state(vocab, hp);
        optimizer_step(state, params, zero_grads, hp);
        auto pa = tensor_views(params);
        auto pb = tensor_views(before);
        for (std::size_t t = 0; t < pa.size(); ++t)
            for (std::size_t i = 0; i < pa[t].size; ++i)
                CHECK(pa[t].data[i] == pb[t].data[i]);
    }

    SUBCASE("gradient norm 50 is scaled to 5") {
        Parameters params(vocab, hp);
        Parameters grads(vocab, hp);
        // a single entry of 50 gives a global norm of 50
        grads.Wz(0, 0) = 50.0;
        AdamState state(vocab, hp);
        Hyperparams hp2 = hp;
        hp2.learning_rate = 1.0;
        optimizer_step(state, params, grads, hp2);
        // adam with bias correction moves by lr * g/(|g|+eps) on step 1;
        // the clipped gradient must behave exactly like an unclipped 5.0
        Parameters params2(vocab, hp);
        Parameters grads2(vocab, hp);
        grads2.Wz(0, 0) = 5.0;
        AdamState state2(vocab, hp);
        optimizer_step(state2, params2, grads2, hp2);
        CHECK(params.Wz(0, 0) == doctest::Approx(params2.Wz(0, 0)).epsilon(1e-12));
    }

    SUBCASE("NaN gradients are reported with the tensor name") {
        Parameters params(vocab, hp);
        Parameters grads(vocab, hp);
        grads.rel_heads[1].b1[0] = std::nan("");
        AdamState state(vocab, hp);
        CHECK_THROWS_WITH_AS(optimizer_step(state, params, grads, hp),
                             doctest::Contains("head.p1.b1"), KbError);
    }

    SUBCASE("repeated steps on a quadratic probe converge") {
        // minimize (w - 3)^2 via the b2 scalar of one head
        Parameters params(vocab, hp);
        AdamState state(vocab, hp);
        Hyperparams hp2 = hp;
        hp2.learning_rate = 0.05;
        for (int it = 0; it < 2000; ++it) {
            Parameters grads(vocab, hp);
            grads.rel_heads[0].b2[0] = 2.0 * (params.rel_heads[0].b2[0] - 3.0);
            optimizer_step(state, params, grads, hp2);
        }
        CHECK(params.rel_heads[0].b2[0] == doctest::Approx(3.0).epsilon(1e-3));
    }
}

TEST_CASE("checkpoint round trip") {
    const Hyperparams hp = micro_hp();
    auto vocab = micro_kb(0).vocab;
    Rng prng(71);
    Checkpoint ck;
    ck.hp = hp;
    ck.params = Parameters::random_init(vocab, hp, prng);
    ck.adam = AdamState(vocab, hp);
    ck.adam->step = 17;
    ck.adam->m.Wz(1, 2) = 0.25;
    ck.epoch = 3;
    ck.extra = {{"note", "fixture"}};

    const auto path = std::filesystem::temp_directory_path() / "rrnlab_ck_test.ckpt";
    save_checkpoint(path, ck);
    const Checkpoint loaded = load_checkpoint(path);

    CHECK(loaded.epoch == 3);
    CHECK(loaded.hp.embedding_dim == hp.embedding_dim);
    CHECK(*loaded.params.vocab == *vocab);
    CHECK(loaded.adam.has_value());
    CHECK(loaded.adam->step == 17);
    CHECK(loaded.adam->m.Wz(1, 2) == doctest::Approx(0.25).epsilon(1e-7));
    // float32 storage: equal after one save/load cycle of the loaded values
    auto va = tensor_views(ck.params);
    auto vb = tensor_views(loaded.params);
    for (std::size_t t = 0; t < va.size(); ++t)
        for (std::size_t i = 0; i < va[t].size; ++i)
            CHECK(vb[t].data[i] ==
                  doctest::Approx(va[t].data[i]).epsilon(1e-6));

    SUBCASE("vocabulary mismatch is detected on load by fingerprint") {
        // flip a relation name inside the stored manifest
        std::string raw = read_file(path);
        const auto pos = raw.find("\"p1\"");
        REQUIRE(pos != std::string::npos);
        raw.replace(pos, 4, "\"pX\"");
        const auto bad = std::filesystem::temp_directory_path() / "rrnlab_ck_bad.ckpt";
        write_file(bad, raw);
        CHECK_THROWS_WITH_AS(load_checkpoint(bad), doctest::Contains("fingerprint"),
                             KbError);
    }
}
