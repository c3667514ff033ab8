#pragma once

#include <span>
#include <string>
#include <vector>

#include "rrnlab/dsl.hpp"
#include "rrnlab/kb.hpp"

namespace rrnlab {

/// Materialized least model. `derived` holds every positive fact of
/// M_{Ω∪D}, database facts included; `derived_order` is the same set in a
/// deterministic derivation order. Satisfied constraint bodies do not stop
/// the fixpoint; they flip `inconsistent` and are recorded.
struct LeastModel {
    AtomSet derived;
    std::vector<GroundAtom> derived_order;
    bool inconsistent = false;
    std::vector<std::string> violations;  // rendered groundings, capped

    /// Constants beyond the sample roster (introduced by rule constants),
    /// appended after roster ids.
    std::vector<std::string> extra_constants;

    bool contains(const GroundAtom& atom) const { return derived.count(atom) > 0; }
};

/// Delta-driven (semi-naive) forward chaining with per-predicate indexes on
/// both argument positions.
LeastModel materialize(const Program& program, const SampleKB& db);

/// Brute-force fixpoint oracle: applies every rule under every substitution
/// until nothing changes. Exponential in rule arity; test-sized inputs only.
/// Must agree with materialize on every input.
LeastModel naive_fixpoint(const Program& program, const SampleKB& db);

enum class Semantics { Plain, Cwa, Lcwa };

struct EntailmentVerdict {
    bool entailed;
    Semantics semantics;
};

/// Decides Ω ∪ D ⊨ ℓ.
///   plain: positive ℓ iff ℓ ∈ M; negative ¬α iff adding α violates a
///          constraint (refutation), so Figure-1-style "evaluates to false"
///          answers exist without the CWA.
///   cwa:   positive as plain; ¬α iff α ∉ M.
///   lcwa:  ¬α iff refuted, or α ∉ M and D has some fact with α's predicate
///          and subject. Sandwiched between plain and cwa.
EntailmentVerdict entails(const Program& program, const SampleKB& db,
                          const Literal& query, Semantics semantics);

bool is_consistent(const Program& program, const SampleKB& db);

/// CWA labels for a query universe: label = (atom ∈ M), origin = specified
/// iff the fact or its negation is in `input_db`. With
/// `append_uncovered_facts`, specified facts outside the universe are
/// appended as extra specified queries, so base relations such as parentOf
/// still show up in metrics (turn it off for restricted scopes).
/// `label_source` lets labels come from a larger fact set than the model
/// input (the countries datasets hide facts from the model but keep the
/// ground truth); it defaults to `input_db` and must share its roster.
std::vector<LabeledQuery> label_queries(const Program& program,
                                        const SampleKB& input_db,
                                        std::span<const GroundAtom> universe,
                                        const SampleKB* label_source = nullptr,
                                        bool append_uncovered_facts = true);

}  // namespace rrnlab
