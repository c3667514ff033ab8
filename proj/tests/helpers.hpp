#pragma once

#include <string>
#include <vector>

#include "rrnlab/dsl.hpp"
#include "rrnlab/kb.hpp"
#include "rrnlab/rng.hpp"

namespace rrnlab::testing {

inline const char* kFig1Ontology = R"(
% bAbI-style household ontology
human(X) :- holds(X,_).
object(Y) :- holds(_,Y).
false :- human(X), object(X).
isAt(Y,Z) :- holds(X,Y), isAt(X,Z).
false :- isAt(X,Y), isAt(X,Z), Y != Z.
)";

inline const char* kFig1Facts = R"(
holds(mary,apple).
isAt(mary,kitchen).
)";

/// Random safe program + database generator for differential tests.
/// Bounded: <= n_constants constants, <= n_relations relations, 2 classes,
/// <= n_rules rules with <= 3 body atoms.
struct RandomKbConfig {
    int n_constants = 6;
    int n_relations = 3;
    int n_classes = 2;
    int n_rules = 5;
    int n_facts = 10;
    bool allow_constraints = false;
    bool allow_rule_constants = true;
};

struct RandomKb {
    Program program;
    SampleKB db;
};

inline RandomKb random_kb(const RandomKbConfig& cfg, Rng& rng) {
    std::vector<std::string> constants;
    for (int i = 0; i < cfg.n_constants; ++i)
        constants.push_back(std::string(1, static_cast<char>('a' + i)));
    const std::vector<std::string> var_names = {"X", "Y", "Z"};

    auto vocab = std::make_shared<Vocabulary>();
    const int n_classes = 1 + static_cast<int>(rng.uniform_int(cfg.n_classes));
    const int n_relations = 1 + static_cast<int>(rng.uniform_int(cfg.n_relations));
    for (int c = 0; c < n_classes; ++c) vocab->add_class("k" + std::to_string(c));
    for (int r = 0; r < n_relations; ++r) vocab->add_relation("p" + std::to_string(r));

    auto random_term = [&](bool allow_var) -> Term {
        if (allow_var && rng.bernoulli(0.7))
            return Term::variable(var_names[rng.uniform_int(var_names.size())]);
        if (cfg.allow_rule_constants && rng.bernoulli(0.3))
            return Term::constant(constants[rng.uniform_int(constants.size())]);
        return Term::variable(var_names[rng.uniform_int(var_names.size())]);
    };
    auto random_atom = [&](bool allow_var) -> Atom {
        if (rng.bernoulli(0.35)) {
            const int c = static_cast<int>(rng.uniform_int(n_classes));
            return Atom::pred(vocab->class_name(c), {random_term(allow_var)});
        }
        const int r = static_cast<int>(rng.uniform_int(n_relations));
        return Atom::pred(vocab->relation_name(r),
                          {random_term(allow_var), random_term(allow_var)});
    };

    std::vector<Rule> rules;
    const int n_rules = 1 + static_cast<int>(rng.uniform_int(cfg.n_rules));
    for (int i = 0; i < n_rules; ++i) {
        std::vector<Atom> body;
        const int n_atoms = 1 + static_cast<int>(rng.uniform_int(3));
        for (int a = 0; a < n_atoms; ++a) body.push_back(random_atom(true));
        std::vector<std::string> bound;
        for (const auto& atom : body)
            for (const auto& t : atom.args)
                if (t.kind == Term::Variable) bound.push_back(t.name);

        Atom head = Atom::bottom();
        const bool constraint = cfg.allow_constraints && rng.bernoulli(0.15);
        if (!constraint) {
            auto head_term = [&]() -> Term {
                if (!bound.empty() && rng.bernoulli(0.8))
                    return Term::variable(bound[rng.uniform_int(bound.size())]);
                return Term::constant(constants[rng.uniform_int(constants.size())]);
            };
            if (rng.bernoulli(0.35)) {
                const int c = static_cast<int>(rng.uniform_int(n_classes));
                head = Atom::pred(vocab->class_name(c), {head_term()});
            } else {
                const int r = static_cast<int>(rng.uniform_int(n_relations));
                head = Atom::pred(vocab->relation_name(r), {head_term(), head_term()});
            }
        } else if (!bound.empty() && rng.bernoulli(0.5)) {
            body.push_back(Atom::neq(Term::variable(bound[rng.uniform_int(bound.size())]),
                                     Term::variable(bound[rng.uniform_int(bound.size())])));
        }
        rules.push_back({std::move(head), std::move(body)});
    }

    Program program(std::move(rules), vocab);

    SampleKB db(vocab, "random");
    for (const auto& c : constants) db.add_individual(c);
    const int n_facts = 1 + static_cast<int>(rng.uniform_int(cfg.n_facts));
    for (int i = 0; i < n_facts; ++i) {
        if (rng.bernoulli(0.35)) {
            const int c = static_cast<int>(rng.uniform_int(n_classes));
            const int s = static_cast<int>(rng.uniform_int(cfg.n_constants));
            if (!db.has_any_polarity(GroundAtom::cls(c, s)))
                db.add_fact(GroundAtom::cls(c, s), true);
        } else {
            const int r = static_cast<int>(rng.uniform_int(n_relations));
            const int s = static_cast<int>(rng.uniform_int(cfg.n_constants));
            const int o = static_cast<int>(rng.uniform_int(cfg.n_constants));
            if (!db.has_any_polarity(GroundAtom::rel(r, s, o)))
                db.add_fact(GroundAtom::rel(r, s, o), true);
        }
    }
    return {std::move(program), std::move(db)};
}

}  // namespace rrnlab::testing
