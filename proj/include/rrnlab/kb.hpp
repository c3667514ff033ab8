#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace rrnlab {

/// Raised for malformed knowledge-base data (unknown names, bad arity, ...).
class KbError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fixed set of class and relation names. Order is declaration order and is
/// part of the contract: class/relation indices are stable.
class Vocabulary {
public:
    /// Reserved predicate token for class-membership triples.
    static constexpr const char* kMemberToken = "member";

    static bool is_reserved(const std::string& name) {
        return name == kMemberToken || name == "false" || name == "_";
    }

    int add_class(const std::string& name);
    int add_relation(const std::string& name);

    int n_classes() const { return static_cast<int>(classes_.size()); }
    int n_relations() const { return static_cast<int>(relations_.size()); }

    const std::string& class_name(int id) const { return classes_.at(id); }
    const std::string& relation_name(int id) const { return relations_.at(id); }
    const std::vector<std::string>& classes() const { return classes_; }
    const std::vector<std::string>& relations() const { return relations_; }

    std::optional<int> class_id(const std::string& name) const;
    std::optional<int> relation_id(const std::string& name) const;
    bool has_name(const std::string& name) const;

    /// FNV-1a over the ordered declaration lists; stored in checkpoints so a
    /// model can refuse data from a different ontology.
    std::uint64_t fingerprint() const;

    bool operator==(const Vocabulary& other) const {
        return classes_ == other.classes_ && relations_ == other.relations_;
    }

private:
    std::vector<std::string> classes_;
    std::vector<std::string> relations_;
    std::unordered_map<std::string, int> class_ids_;
    std::unordered_map<std::string, int> relation_ids_;
};

using VocabularyPtr = std::shared_ptr<const Vocabulary>;

enum class PredKind : std::uint8_t { Class, Relation };

/// Reference to a class or relation in some vocabulary.
struct PredRef {
    PredKind kind;
    int id;

    bool operator==(const PredRef&) const = default;
};

/// Ground positive atom over dense individual ids. Class atoms leave
/// `object` at -1.
struct GroundAtom {
    PredRef pred;
    int subject;
    int object;

    static GroundAtom cls(int class_id, int individual) {
        return {{PredKind::Class, class_id}, individual, -1};
    }
    static GroundAtom rel(int relation_id, int subj, int obj) {
        return {{PredKind::Relation, relation_id}, subj, obj};
    }

    bool operator==(const GroundAtom&) const = default;
};

struct GroundAtomHash {
    std::size_t operator()(const GroundAtom& a) const {
        std::uint64_t h = static_cast<std::uint64_t>(a.pred.id) << 2 |
                          (a.pred.kind == PredKind::Class ? 1u : 0u);
        h = h * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(a.subject + 1);
        h = h * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(a.object + 1);
        h ^= h >> 29;
        return static_cast<std::size_t>(h * 0xbf58476d1ce4e5b9ULL);
    }
};

using AtomSet = std::unordered_set<GroundAtom, GroundAtomHash>;

/// Possibly negated ground fact in surface (named) form. Class facts have a
/// single argument; relation facts have two.
struct Literal {
    bool positive = true;
    std::string predicate;
    std::vector<std::string> args;

    bool operator==(const Literal&) const = default;
};

/// ⟨subject, predicate, object⟩ with a polarity flag; class facts are routed
/// through the reserved `member` predicate.
struct Triple {
    std::string subject;
    std::string predicate;
    std::string object;
    bool positive = true;

    bool operator==(const Triple&) const = default;
};

Triple as_triple(const Literal& lit, const Vocabulary& vocab);
Literal from_triple(const Triple& t, const Vocabulary& vocab);

struct Fact {
    GroundAtom atom;
    bool positive;

    bool operator==(const Fact&) const = default;
};

/// One benchmark sample: a roster of individuals and a set of ground facts
/// over a shared vocabulary. Immutable after construction in normal use;
/// the corruption operations copy first.
class SampleKB {
public:
    SampleKB(VocabularyPtr vocab, std::string provenance = {})
        : vocab_(std::move(vocab)), provenance_(std::move(provenance)) {}

    const Vocabulary& vocab() const { return *vocab_; }
    const VocabularyPtr& vocab_ptr() const { return vocab_; }

    int add_individual(const std::string& name);
    int individual_id(const std::string& name) const;  // throws KbError
    std::optional<int> find_individual(const std::string& name) const;
    const std::string& individual_name(int id) const { return individuals_.at(id); }
    const std::vector<std::string>& individuals() const { return individuals_; }
    int n_individuals() const { return static_cast<int>(individuals_.size()); }

    /// Adds a fact; individuals must already be interned. Contradictory
    /// additions (fact plus its negation) are rejected unless
    /// `allow_contradiction` is set, which also marks the sample.
    void add_fact(const GroundAtom& atom, bool positive,
                  bool allow_contradiction = false);
    void add_literal(const Literal& lit, bool allow_contradiction = false);

    bool has_fact(const GroundAtom& atom, bool positive) const {
        return positive ? pos_.count(atom) > 0 : neg_.count(atom) > 0;
    }
    bool has_any_polarity(const GroundAtom& atom) const {
        return pos_.count(atom) > 0 || neg_.count(atom) > 0;
    }

    const std::vector<Fact>& facts() const { return facts_; }
    const AtomSet& positive_facts() const { return pos_; }
    const AtomSet& negative_facts() const { return neg_; }

    const std::string& provenance() const { return provenance_; }
    void set_provenance(std::string p) { provenance_ = std::move(p); }

    bool marked_inconsistent() const { return marked_inconsistent_; }

    Literal to_literal(const Fact& f) const;
    GroundAtom intern(const Literal& lit) const;  // positive form

private:
    VocabularyPtr vocab_;
    std::vector<std::string> individuals_;
    std::unordered_map<std::string, int> individual_ids_;
    std::vector<Fact> facts_;
    AtomSet pos_;
    AtomSet neg_;
    std::string provenance_;
    bool marked_inconsistent_ = false;
};

/// Per-individual 3-valued summary of explicitly stated class memberships,
/// aligned with vocabulary class order: +1 stated member, -1 stated
/// non-member, 0 unspecified.
using IncidenceVector = std::vector<std::int8_t>;

IncidenceVector incidence_vector(const SampleKB& sample, int individual);
IncidenceVector incidence_vector(const SampleKB& sample, const std::string& name);

/// Query enumeration scope. Full emits every candidate; Touching keeps
/// relation and class queries that mention a test individual, plus class
/// queries for `class_query_individuals` (the countries datasets route
/// region/subregion individuals through the latter).
struct QueryScope {
    enum Kind { Full, Touching } kind = Full;
    std::vector<int> test_individuals;
    std::vector<int> class_query_individuals;

    static QueryScope full() { return {}; }
    static QueryScope touching(std::vector<int> test,
                               std::vector<int> class_only = {}) {
        return {Touching, std::move(test), std::move(class_only)};
    }
};

/// Candidate triples to ask of a model: all ordered pairs (reflexive pairs
/// included) for every derived relation, plus every (individual, class)
/// membership. |full| = n^2 * |derived| + n * N_C.
std::vector<GroundAtom> query_universe(const SampleKB& sample,
                                       std::span<const int> derived_relations,
                                       const QueryScope& scope = {});

enum class QueryOrigin : std::uint8_t { Specified, Inferable };
enum class QueryGroup : std::uint8_t { Class, Relation };

/// Ground-truth answer for one candidate triple. `atom` is always the
/// positive form.
struct LabeledQuery {
    GroundAtom atom;
    bool label;
    QueryOrigin origin;

    QueryGroup group() const {
        return atom.pred.kind == PredKind::Class ? QueryGroup::Class
                                                 : QueryGroup::Relation;
    }

    bool operator==(const LabeledQuery&) const = default;
};

}  // namespace rrnlab
