#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rrnlab/kb.hpp"

namespace rrnlab {

class ParseError : public std::runtime_error {
public:
    ParseError(int line, int col, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ", col " +
                             std::to_string(col) + ": " + message),
          line(line),
          col(col) {}

    int line;
    int col;
};

struct Term {
    enum Kind { Constant, Variable, Anonymous } kind = Constant;
    std::string name;

    static Term constant(std::string n) { return {Constant, std::move(n)}; }
    static Term variable(std::string n) { return {Variable, std::move(n)}; }
    static Term anon() { return {Anonymous, "_"}; }

    bool operator==(const Term&) const = default;
};

/// Body/head element: a class or relation atom, an inequality between two
/// terms, or the constraint head ⊥ (spelled `false`).
struct Atom {
    enum Type { Pred, Neq, Bottom } type = Pred;
    std::string predicate;  // empty for Neq/Bottom
    std::vector<Term> args;

    static Atom pred(std::string name, std::vector<Term> args) {
        return {Pred, std::move(name), std::move(args)};
    }
    static Atom neq(Term a, Term b) { return {Neq, "", {std::move(a), std::move(b)}}; }
    static Atom bottom() { return {Bottom, "", {}}; }

    bool operator==(const Atom&) const = default;
};

struct Rule {
    Atom head;
    std::vector<Atom> body;

    bool is_constraint() const { return head.type == Atom::Bottom; }

    bool operator==(const Rule&) const = default;
};

/// A finite set of safe rules over a fixed vocabulary.
class Program {
public:
    Program() = default;
    Program(std::vector<Rule> rules, VocabularyPtr vocab)
        : rules_(std::move(rules)), vocab_(std::move(vocab)) {}

    const std::vector<Rule>& rules() const { return rules_; }
    const Vocabulary& vocab() const { return *vocab_; }
    const VocabularyPtr& vocab_ptr() const { return vocab_; }

    /// Relations that appear in the head of at least one non-constraint
    /// rule, in vocabulary order. These define the relation query universe.
    std::vector<int> derived_relation_ids() const;

    bool operator==(const Program& other) const {
        return rules_ == other.rules_ && *vocab_ == *other.vocab_;
    }

private:
    std::vector<Rule> rules_;
    VocabularyPtr vocab_;
};

/// Parses `.ont` text: `head :- b1, ..., bn.` rules, `false` heads for
/// constraints, `X != Y` inequalities, optional `@class a, b.` /
/// `@relation r.` declarations, `%` or `#` comments. Verifies safety and
/// arity consistency; the vocabulary is the explicit declarations followed
/// by first use.
Program parse_program(std::string_view text);

/// Parses facts in either the inline form `pred(a,b).` / `-pred(a,b).` or
/// the tab-separated triple form `subject<TAB>pred<TAB>object<TAB>+|-`
/// (class facts via the `member` token). Lines may mix; `#`/`%` comment.
/// When a vocabulary is given, predicates and arities are validated
/// against it.
std::vector<Literal> parse_facts(std::string_view text,
                                 const Vocabulary* vocab = nullptr);

std::string serialize_program(const Program& program);
std::string serialize_facts(std::span<const Literal> facts);

/// Loads the facts of a sample file into a SampleKB, interning individuals
/// in order of first appearance.
SampleKB sample_from_literals(VocabularyPtr vocab,
                              std::span<const Literal> facts,
                              std::string provenance = {},
                              bool allow_contradiction = false);

}  // namespace rrnlab
