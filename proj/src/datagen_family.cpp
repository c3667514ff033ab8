#include <algorithm>

#include "rrnlab/datagen.hpp"

namespace rrnlab {

namespace {

// Appendix-E predicate list; parentOf is the only base relation, everything
// else is derived from parentOf plus genders.
const char* kFamilyOntology = R"(@class female, male.
@relation auntOf, boyCousinOf, boyFirstCousinOnceRemovedOf, boySecondCousinOf,
          brotherOf, daughterOf, fatherOf, girlCousinOf,
          girlFirstCousinOnceRemovedOf, girlSecondCousinOf, granddaughterOf,
          grandfatherOf, grandmotherOf, grandsonOf, greatAuntOf,
          greatGranddaughterOf, greatGrandfatherOf, greatGrandmotherOf,
          greatGrandsonOf, greatUncleOf, motherOf, nephewOf, nieceOf, parentOf,
          secondAuntOf, secondUncleOf, sisterOf, sonOf, uncleOf.

fatherOf(X,Y) :- parentOf(X,Y), male(X).
motherOf(X,Y) :- parentOf(X,Y), female(X).
sonOf(X,Y) :- parentOf(Y,X), male(X).
daughterOf(X,Y) :- parentOf(Y,X), female(X).

brotherOf(X,Y) :- parentOf(P,X), parentOf(P,Y), X != Y, male(X).
sisterOf(X,Y) :- parentOf(P,X), parentOf(P,Y), X != Y, female(X).

grandfatherOf(X,Y) :- parentOf(X,Z), parentOf(Z,Y), male(X).
grandmotherOf(X,Y) :- parentOf(X,Z), parentOf(Z,Y), female(X).
grandsonOf(X,Y) :- parentOf(Y,Z), parentOf(Z,X), male(X).
granddaughterOf(X,Y) :- parentOf(Y,Z), parentOf(Z,X), female(X).

greatGrandfatherOf(X,Y) :- parentOf(X,A), parentOf(A,B), parentOf(B,Y), male(X).
greatGrandmotherOf(X,Y) :- parentOf(X,A), parentOf(A,B), parentOf(B,Y), female(X).
greatGrandsonOf(X,Y) :- parentOf(Y,A), parentOf(A,B), parentOf(B,X), male(X).
greatGranddaughterOf(X,Y) :- parentOf(Y,A), parentOf(A,B), parentOf(B,X), female(X).

% parent's sibling
uncleOf(X,Y) :- parentOf(P,Y), parentOf(G,P), parentOf(G,X), X != P, male(X).
auntOf(X,Y) :- parentOf(P,Y), parentOf(G,P), parentOf(G,X), X != P, female(X).
nephewOf(X,Y) :- parentOf(P,X), parentOf(G,P), parentOf(G,Y), Y != P, male(X).
nieceOf(X,Y) :- parentOf(P,X), parentOf(G,P), parentOf(G,Y), Y != P, female(X).

% grandparent's sibling
greatUncleOf(X,Y) :- parentOf(Z,P), parentOf(P,Y), parentOf(G,X), parentOf(G,Z), X != Z, male(X).
greatAuntOf(X,Y) :- parentOf(Z,P), parentOf(P,Y), parentOf(G,X), parentOf(G,Z), X != Z, female(X).

% children of siblings
boyCousinOf(X,Y) :- parentOf(P,X), parentOf(Q,Y), parentOf(G,P), parentOf(G,Q), P != Q, male(X).
girlCousinOf(X,Y) :- parentOf(P,X), parentOf(Q,Y), parentOf(G,P), parentOf(G,Q), P != Q, female(X).

% child of a cousin
boyFirstCousinOnceRemovedOf(X,Y) :- parentOf(C,X), parentOf(P,C), parentOf(Q,Y), parentOf(G,P), parentOf(G,Q), P != Q, male(X).
girlFirstCousinOnceRemovedOf(X,Y) :- parentOf(C,X), parentOf(P,C), parentOf(Q,Y), parentOf(G,P), parentOf(G,Q), P != Q, female(X).

% children of cousins
boySecondCousinOf(X,Y) :- parentOf(P,X), parentOf(Q,Y), parentOf(A,P), parentOf(B,Q), parentOf(G,A), parentOf(G,B), A != B, male(X).
girlSecondCousinOf(X,Y) :- parentOf(P,X), parentOf(Q,Y), parentOf(A,P), parentOf(B,Q), parentOf(G,A), parentOf(G,B), A != B, female(X).

% parent's cousin
secondUncleOf(X,Y) :- parentOf(P,Y), parentOf(A,X), parentOf(B,P), parentOf(G,A), parentOf(G,B), A != B, male(X).
secondAuntOf(X,Y) :- parentOf(P,Y), parentOf(A,X), parentOf(B,P), parentOf(G,A), parentOf(G,B), A != B, female(X).

false :- male(X), female(X).
)";

}  // namespace

const std::string& family_ontology_text() {
    static const std::string text = kFamilyOntology;
    return text;
}

const Program& family_ontology() {
    static const Program program = parse_program(family_ontology_text());
    return program;
}

void FamilyGenConfig::validate() const {
    if (max_people <= 0 || max_depth <= 0 || max_branching <= 0)
        throw KbError("family generator bounds must be positive");
    if (stop_probability < 0.0 || stop_probability > 1.0)
        throw KbError("stop_probability must be in [0,1]");
}

SampleKB generate_family_sample(const FamilyGenConfig& cfg, Rng& rng) {
    cfg.validate();

    struct Person {
        bool male;
        int generation;
        int parents[2] = {-1, -1};
        int n_parents = 0;
        int n_children = 0;
    };
    std::vector<Person> people;
    std::vector<std::pair<int, int>> edges;  // (parent, child)
    int min_gen = 0, max_gen = 0;

    people.push_back({rng.bernoulli(0.5), 0});

    auto generations = [&](int candidate_gen) {
        return std::max(max_gen, candidate_gen) - std::min(min_gen, candidate_gen) + 1;
    };

    int rejections = 0;
    while (static_cast<int>(people.size()) < cfg.max_people && rejections < 1000) {
        const int target = static_cast<int>(rng.uniform_int(people.size()));
        Person& t = people[target];
        const bool parent_possible = t.n_parents < 2;
        const bool add_parent = parent_possible && rng.bernoulli(0.5);

        if (add_parent) {
            const int gen = t.generation - 1;
            if (generations(gen) > cfg.max_depth) {
                ++rejections;
                continue;
            }
            // second parent takes the opposite gender
            bool male = t.n_parents == 1 ? !people[t.parents[0]].male : rng.bernoulli(0.5);
            const int id = static_cast<int>(people.size());
            people.push_back({male, gen});
            people[id].n_children = 1;
            people[target].parents[people[target].n_parents++] = id;
            edges.emplace_back(id, target);
            min_gen = std::min(min_gen, gen);
        } else {
            const int gen = t.generation + 1;
            if (t.n_children >= cfg.max_branching || generations(gen) > cfg.max_depth) {
                ++rejections;
                continue;
            }
            const int id = static_cast<int>(people.size());
            people.push_back({rng.bernoulli(0.5), gen});
            people[id].parents[0] = target;
            people[id].n_parents = 1;
            people[target].n_children++;
            edges.emplace_back(target, id);
            max_gen = std::max(max_gen, gen);
        }
        rejections = 0;
        if (rng.bernoulli(cfg.stop_probability)) break;
    }

    SampleKB sample(family_ontology().vocab_ptr());
    const auto& vocab = sample.vocab();
    const int female_id = *vocab.class_id("female");
    const int male_id = *vocab.class_id("male");
    const int parent_rel = *vocab.relation_id("parentOf");
    for (std::size_t i = 0; i < people.size(); ++i)
        sample.add_individual("p" + std::to_string(i));
    for (std::size_t i = 0; i < people.size(); ++i)
        sample.add_fact(GroundAtom::cls(people[i].male ? male_id : female_id,
                                        static_cast<int>(i)),
                        true);
    for (const auto& [p, c] : edges)
        sample.add_fact(GroundAtom::rel(parent_rel, p, c), true);
    return sample;
}

int family_tree_depth(const SampleKB& sample) {
    const int parent_rel = *sample.vocab().relation_id("parentOf");
    const int n = sample.n_individuals();
    std::vector<std::vector<int>> children(n);
    std::vector<int> indegree(n, 0);
    for (const auto& f : sample.facts()) {
        if (!f.positive || f.atom.pred.kind != PredKind::Relation ||
            f.atom.pred.id != parent_rel)
            continue;
        children[f.atom.subject].push_back(f.atom.object);
        ++indegree[f.atom.object];
    }
    // longest chain in the parentOf DAG, in generations
    std::vector<int> depth(n, 1);
    std::vector<int> order;
    for (int i = 0; i < n; ++i)
        if (indegree[i] == 0) order.push_back(i);
    for (std::size_t k = 0; k < order.size(); ++k) {
        const int u = order[k];
        for (int v : children[u]) {
            depth[v] = std::max(depth[v], depth[u] + 1);
            if (--indegree[v] == 0) order.push_back(v);
        }
    }
    return *std::max_element(depth.begin(), depth.end());
}

int family_tree_branching(const SampleKB& sample) {
    const int parent_rel = *sample.vocab().relation_id("parentOf");
    std::vector<int> kids(sample.n_individuals(), 0);
    int best = 0;
    for (const auto& f : sample.facts())
        if (f.positive && f.atom.pred.kind == PredKind::Relation &&
            f.atom.pred.id == parent_rel)
            best = std::max(best, ++kids[f.atom.subject]);
    return best;
}

DatasetManifest generate_family_dataset(const FamilyDatasetConfig& cfg,
                                        const std::filesystem::path& out_dir) {
    const Program& program = family_ontology();
    const auto derived = program.derived_relation_ids();

    DatasetManifest manifest;
    manifest.name = "family-trees";
    manifest.seed = cfg.seed;
    manifest.params = {{"max_people", cfg.family.max_people},
                       {"max_depth", cfg.family.max_depth},
                       {"max_branching", cfg.family.max_branching},
                       {"stop_probability", cfg.family.stop_probability},
                       {"n_train", cfg.n_train},
                       {"n_eval", cfg.n_eval},
                       {"n_test", cfg.n_test}};

    write_file(out_dir / manifest.ontology_file, family_ontology_text());

    const std::vector<std::pair<std::string, int>> splits = {
        {"train", cfg.n_train}, {"eval", cfg.n_eval}, {"test", cfg.n_test}};
    std::uint64_t sample_counter = 0;
    for (const auto& [split, count] : splits) {
        for (int i = 0; i < count; ++i, ++sample_counter) {
            Rng rng(derive_seed(cfg.seed, sample_counter));
            SampleKB sample = generate_family_sample(cfg.family, rng);
            sample.set_provenance("family-trees seed=" + std::to_string(cfg.seed) +
                                  " sample=" + std::to_string(sample_counter));
            const auto universe = query_universe(sample, derived);
            const auto labels = label_queries(program, sample, universe);

            char name[64];
            std::snprintf(name, sizeof(name), "sample_%04d.tsv", i);
            const std::string rel = split + "/" + name;
            write_file(out_dir / rel, sample_to_tsv(sample));
            write_file(out_dir / "labels" / rel, labels_to_tsv(sample, labels));
            manifest.splits[split].push_back(rel);
        }
    }
    write_manifest(out_dir, manifest);
    return manifest;
}

SampleKB clone_sample(const SampleKB& sample) {
    SampleKB copy(sample.vocab_ptr(), sample.provenance());
    for (const auto& name : sample.individuals()) copy.add_individual(name);
    for (const auto& f : sample.facts()) copy.add_fact(f.atom, f.positive, true);
    return copy;
}

}  // namespace rrnlab
