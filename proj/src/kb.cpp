#include "rrnlab/kb.hpp"

#include <algorithm>

namespace rrnlab {

int Vocabulary::add_class(const std::string& name) {
    if (is_reserved(name)) throw KbError("reserved name used as class: " + name);
    if (has_name(name)) {
        auto it = class_ids_.find(name);
        if (it != class_ids_.end()) return it->second;
        throw KbError("name already declared as relation: " + name);
    }
    classes_.push_back(name);
    class_ids_[name] = n_classes() - 1;
    return n_classes() - 1;
}

int Vocabulary::add_relation(const std::string& name) {
    if (is_reserved(name)) throw KbError("reserved name used as relation: " + name);
    if (has_name(name)) {
        auto it = relation_ids_.find(name);
        if (it != relation_ids_.end()) return it->second;
        throw KbError("name already declared as class: " + name);
    }
    relations_.push_back(name);
    relation_ids_[name] = n_relations() - 1;
    return n_relations() - 1;
}

std::optional<int> Vocabulary::class_id(const std::string& name) const {
    auto it = class_ids_.find(name);
    if (it == class_ids_.end()) return std::nullopt;
    return it->second;
}

std::optional<int> Vocabulary::relation_id(const std::string& name) const {
    auto it = relation_ids_.find(name);
    if (it == relation_ids_.end()) return std::nullopt;
    return it->second;
}

bool Vocabulary::has_name(const std::string& name) const {
    return class_ids_.count(name) > 0 || relation_ids_.count(name) > 0;
}

std::uint64_t Vocabulary::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto eat = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        h ^= 0x1f;
        h *= 0x100000001b3ULL;
    };
    eat("classes");
    for (const auto& c : classes_) eat(c);
    eat("relations");
    for (const auto& r : relations_) eat(r);
    return h;
}

Triple as_triple(const Literal& lit, const Vocabulary& vocab) {
    if (auto cid = vocab.class_id(lit.predicate)) {
        if (lit.args.size() != 1)
            throw KbError("class literal needs 1 argument: " + lit.predicate);
        return {lit.args[0], Vocabulary::kMemberToken, vocab.class_name(*cid),
                lit.positive};
    }
    if (auto rid = vocab.relation_id(lit.predicate)) {
        if (lit.args.size() != 2)
            throw KbError("relation literal needs 2 arguments: " + lit.predicate);
        return {lit.args[0], vocab.relation_name(*rid), lit.args[1], lit.positive};
    }
    throw KbError("unknown predicate: " + lit.predicate);
}

Literal from_triple(const Triple& t, const Vocabulary& vocab) {
    if (t.predicate == Vocabulary::kMemberToken) {
        if (!vocab.class_id(t.object))
            throw KbError("unknown class in triple: " + t.object);
        return {t.positive, t.object, {t.subject}};
    }
    if (!vocab.relation_id(t.predicate))
        throw KbError("unknown predicate in triple: " + t.predicate);
    return {t.positive, t.predicate, {t.subject, t.object}};
}

int SampleKB::add_individual(const std::string& name) {
    auto it = individual_ids_.find(name);
    if (it != individual_ids_.end()) return it->second;
    individuals_.push_back(name);
    individual_ids_[name] = n_individuals() - 1;
    return n_individuals() - 1;
}

int SampleKB::individual_id(const std::string& name) const {
    auto it = individual_ids_.find(name);
    if (it == individual_ids_.end()) throw KbError("unknown individual: " + name);
    return it->second;
}

std::optional<int> SampleKB::find_individual(const std::string& name) const {
    auto it = individual_ids_.find(name);
    if (it == individual_ids_.end()) return std::nullopt;
    return it->second;
}

void SampleKB::add_fact(const GroundAtom& atom, bool positive,
                        bool allow_contradiction) {
    if (atom.subject < 0 || atom.subject >= n_individuals())
        throw KbError("fact subject not in roster");
    if (atom.pred.kind == PredKind::Relation) {
        if (atom.object < 0 || atom.object >= n_individuals())
            throw KbError("fact object not in roster");
        if (atom.pred.id < 0 || atom.pred.id >= vocab_->n_relations())
            throw KbError("fact relation not in vocabulary");
    } else {
        if (atom.pred.id < 0 || atom.pred.id >= vocab_->n_classes())
            throw KbError("fact class not in vocabulary");
    }
    if (has_fact(atom, positive)) return;
    if (has_fact(atom, !positive)) {
        if (!allow_contradiction)
            throw KbError("fact added together with its negation");
        marked_inconsistent_ = true;
    }
    facts_.push_back({atom, positive});
    (positive ? pos_ : neg_).insert(atom);
}

void SampleKB::add_literal(const Literal& lit, bool allow_contradiction) {
    add_fact(intern(lit), lit.positive, allow_contradiction);
}

GroundAtom SampleKB::intern(const Literal& lit) const {
    if (auto cid = vocab_->class_id(lit.predicate)) {
        if (lit.args.size() != 1)
            throw KbError("class literal needs 1 argument: " + lit.predicate);
        return GroundAtom::cls(*cid, individual_id(lit.args[0]));
    }
    if (auto rid = vocab_->relation_id(lit.predicate)) {
        if (lit.args.size() != 2)
            throw KbError("relation literal needs 2 arguments: " + lit.predicate);
        return GroundAtom::rel(*rid, individual_id(lit.args[0]),
                               individual_id(lit.args[1]));
    }
    throw KbError("unknown predicate: " + lit.predicate);
}

Literal SampleKB::to_literal(const Fact& f) const {
    Literal lit;
    lit.positive = f.positive;
    if (f.atom.pred.kind == PredKind::Class) {
        lit.predicate = vocab_->class_name(f.atom.pred.id);
        lit.args = {individual_name(f.atom.subject)};
    } else {
        lit.predicate = vocab_->relation_name(f.atom.pred.id);
        lit.args = {individual_name(f.atom.subject), individual_name(f.atom.object)};
    }
    return lit;
}

IncidenceVector incidence_vector(const SampleKB& sample, int individual) {
    if (individual < 0 || individual >= sample.n_individuals())
        throw KbError("unknown individual id: " + std::to_string(individual));
    IncidenceVector v(sample.vocab().n_classes(), 0);
    for (int c = 0; c < sample.vocab().n_classes(); ++c) {
        const GroundAtom atom = GroundAtom::cls(c, individual);
        if (sample.has_fact(atom, true))
            v[c] = 1;
        else if (sample.has_fact(atom, false))
            v[c] = -1;
    }
    return v;
}

IncidenceVector incidence_vector(const SampleKB& sample, const std::string& name) {
    return incidence_vector(sample, sample.individual_id(name));
}

std::vector<GroundAtom> query_universe(const SampleKB& sample,
                                       std::span<const int> derived_relations,
                                       const QueryScope& scope) {
    const int n = sample.n_individuals();
    if (n == 0) throw KbError("query universe over empty roster");
    std::vector<GroundAtom> out;

    if (scope.kind == QueryScope::Full) {
        out.reserve(static_cast<std::size_t>(n) * n * derived_relations.size() +
                    static_cast<std::size_t>(n) * sample.vocab().n_classes());
        for (int r : derived_relations)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) out.push_back(GroundAtom::rel(r, i, j));
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < sample.vocab().n_classes(); ++c)
                out.push_back(GroundAtom::cls(c, i));
        return out;
    }

    std::vector<char> is_test(n, 0);
    for (int i : scope.test_individuals) is_test.at(i) = 1;
    for (int r : derived_relations)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (is_test[i] || is_test[j]) out.push_back(GroundAtom::rel(r, i, j));

    std::vector<char> class_rows(n, 0);
    for (int i : scope.test_individuals) class_rows.at(i) = 1;
    for (int i : scope.class_query_individuals) class_rows.at(i) = 1;
    for (int i = 0; i < n; ++i)
        if (class_rows[i])
            for (int c = 0; c < sample.vocab().n_classes(); ++c)
                out.push_back(GroundAtom::cls(c, i));
    return out;
}

}  // namespace rrnlab
