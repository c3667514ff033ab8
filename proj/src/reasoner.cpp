#include "rrnlab/reasoner.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <sstream>

namespace rrnlab {

namespace {

constexpr int kMaxRecordedViolations = 8;

// Term slots: >= 0 is a variable index, < 0 encodes constant id c as -(c+1).
int encode_const(int cid) { return -(cid + 1); }
bool is_const_slot(int s) { return s < 0; }
int const_of_slot(int s) { return -s - 1; }

struct CompiledAtom {
    PredRef pred;
    int a = 0;
    int b = 0;  // unused for class atoms
};

struct CompiledCheck {
    int a = 0;
    int b = 0;  // slots; inequality holds when values differ
};

struct CompiledRule {
    bool constraint = false;
    PredRef head_pred{};
    int head_a = 0;
    int head_b = 0;
    std::vector<CompiledAtom> atoms;
    std::vector<CompiledCheck> checks;
    int n_vars = 0;
    // one join order per delta position: orders[d] is a permutation of atom
    // indices starting with d, greedily continued by bound-variable count
    std::vector<std::vector<int>> orders;
};

// Roster constants first, rule constants appended.
struct ConstTable {
    std::vector<std::string> names;
    std::unordered_map<std::string, int> ids;

    explicit ConstTable(const SampleKB& db) {
        names = db.individuals();
        for (int i = 0; i < static_cast<int>(names.size()); ++i) ids[names[i]] = i;
    }
    int intern(const std::string& name) {
        auto it = ids.find(name);
        if (it != ids.end()) return it->second;
        names.push_back(name);
        ids[name] = static_cast<int>(names.size()) - 1;
        return static_cast<int>(names.size()) - 1;
    }
};

std::uint64_t pair_key(int s, int o) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(s + 1)) << 32) |
           static_cast<std::uint32_t>(o + 1);
}

struct PredStore {
    std::vector<std::pair<int, int>> tuples;  // insertion order
    std::unordered_multimap<int, int> by_subject;
    std::unordered_multimap<int, int> by_object;
    std::unordered_set<std::uint64_t> present;

    bool insert(int s, int o) {
        if (!present.insert(pair_key(s, o)).second) return false;
        const int idx = static_cast<int>(tuples.size());
        tuples.emplace_back(s, o);
        by_subject.emplace(s, idx);
        by_object.emplace(o, idx);
        return true;
    }
    bool contains(int s, int o) const { return present.count(pair_key(s, o)) > 0; }
};

struct FactDatabase {
    std::vector<PredStore> classes;
    std::vector<PredStore> relations;

    explicit FactDatabase(const Vocabulary& vocab)
        : classes(vocab.n_classes()), relations(vocab.n_relations()) {}

    PredStore& store(PredRef p) {
        return p.kind == PredKind::Class ? classes[p.id] : relations[p.id];
    }
    const PredStore& store(PredRef p) const {
        return p.kind == PredKind::Class ? classes[p.id] : relations[p.id];
    }
};

class RuleCompiler {
public:
    RuleCompiler(const Program& program, ConstTable& consts) : program_(program) {
        for (const auto& rule : program.rules()) compiled_.push_back(compile(rule, consts));
    }

    const std::vector<CompiledRule>& rules() const { return compiled_; }

private:
    CompiledRule compile(const Rule& rule, ConstTable& consts) {
        CompiledRule out;
        std::map<std::string, int> var_ids;
        auto slot = [&](const Term& t) -> int {
            if (t.kind == Term::Constant) return encode_const(consts.intern(t.name));
            if (t.kind == Term::Anonymous) {
                // each '_' is a fresh, never-checked variable
                const int v = out.n_vars++;
                return v;
            }
            auto it = var_ids.find(t.name);
            if (it != var_ids.end()) return it->second;
            const int v = out.n_vars++;
            var_ids[t.name] = v;
            return v;
        };

        for (const auto& atom : rule.body) {
            if (atom.type == Atom::Neq) {
                out.checks.push_back({slot(atom.args[0]), slot(atom.args[1])});
                continue;
            }
            CompiledAtom ca;
            ca.pred = pred_ref(atom);
            ca.a = slot(atom.args[0]);
            ca.b = atom.args.size() == 2 ? slot(atom.args[1]) : 0;
            out.atoms.push_back(ca);
        }
        out.constraint = rule.is_constraint();
        if (!out.constraint) {
            out.head_pred = pred_ref(rule.head);
            out.head_a = slot(rule.head.args[0]);
            out.head_b = rule.head.args.size() == 2 ? slot(rule.head.args[1]) : 0;
        }
        plan_orders(out);
        return out;
    }

    PredRef pred_ref(const Atom& atom) const {
        const auto& vocab = program_.vocab();
        if (auto cid = vocab.class_id(atom.predicate)) return {PredKind::Class, *cid};
        if (auto rid = vocab.relation_id(atom.predicate)) return {PredKind::Relation, *rid};
        throw KbError("predicate not in vocabulary: " + atom.predicate);
    }

    void plan_orders(CompiledRule& rule) const {
        const int n = static_cast<int>(rule.atoms.size());
        rule.orders.resize(n);
        for (int d = 0; d < n; ++d) {
            std::vector<char> used(n, 0);
            std::vector<char> bound(rule.n_vars, 0);
            auto bind_atom = [&](int i) {
                const auto& a = rule.atoms[i];
                if (!is_const_slot(a.a)) bound[a.a] = 1;
                if (a.pred.kind == PredKind::Relation && !is_const_slot(a.b)) bound[a.b] = 1;
            };
            auto score = [&](int i) {
                const auto& a = rule.atoms[i];
                int s = 0;
                if (is_const_slot(a.a) || bound[a.a]) ++s;
                if (a.pred.kind == PredKind::Class || is_const_slot(a.b) || bound[a.b]) ++s;
                return s;
            };
            auto& order = rule.orders[d];
            order.push_back(d);
            used[d] = 1;
            bind_atom(d);
            for (int step = 1; step < n; ++step) {
                int best = -1, best_score = -1;
                for (int i = 0; i < n; ++i) {
                    if (used[i]) continue;
                    const int s = score(i);
                    if (s > best_score) {
                        best = i;
                        best_score = s;
                    }
                }
                order.push_back(best);
                used[best] = 1;
                bind_atom(best);
            }
        }
    }

    const Program& program_;
    std::vector<CompiledRule> compiled_;
};

class SemiNaiveEngine {
public:
    SemiNaiveEngine(const Program& program, const SampleKB& db)
        : program_(program), db_(db), consts_(db), facts_(program.vocab()) {
        compiler_ = std::make_unique<RuleCompiler>(program, consts_);
    }

    LeastModel run() {
        LeastModel model;
        // seed with the positive database facts
        for (const auto& f : db_.facts()) {
            if (!f.positive) continue;
            if (facts_.store(f.atom.pred).insert(f.atom.subject, f.atom.object))
                model.derived_order.push_back(f.atom);
        }
        // the first delta is the database itself
        delta_begin_.zero(facts_);

        while (true) {
            Boundaries next_begin;
            next_begin.assign_sizes(facts_);
            std::vector<GroundAtom> fresh;
            for (const auto& rule : compiler_->rules()) apply_rule(rule, model, fresh);
            bool grew = false;
            for (const auto& atom : fresh) {
                if (facts_.store(atom.pred).insert(atom.subject, atom.object)) {
                    model.derived_order.push_back(atom);
                    grew = true;
                }
            }
            delta_begin_ = next_begin;
            if (!grew) break;
        }

        for (const auto& atom : model.derived_order) model.derived.insert(atom);

        // a stated negation of a derived fact is a violation as well
        check_negative_facts(model);
        model.extra_constants.assign(consts_.names.begin() + db_.n_individuals(),
                                     consts_.names.end());
        return model;
    }

private:
    struct Boundaries {
        std::vector<int> classes, relations;
        void assign_sizes(const FactDatabase& facts) {
            classes.clear();
            relations.clear();
            for (const auto& s : facts.classes)
                classes.push_back(static_cast<int>(s.tuples.size()));
            for (const auto& s : facts.relations)
                relations.push_back(static_cast<int>(s.tuples.size()));
        }
        void zero(const FactDatabase& facts) {
            classes.assign(facts.classes.size(), 0);
            relations.assign(facts.relations.size(), 0);
        }
        int of(PredRef p) const {
            return p.kind == PredKind::Class ? classes[p.id] : relations[p.id];
        }
    };

    enum class Range { Old, Delta, Full };

    void apply_rule(const CompiledRule& rule, LeastModel& model,
                    std::vector<GroundAtom>& fresh) {
        const int n = static_cast<int>(rule.atoms.size());
        for (int d = 0; d < n; ++d) {
            // skip no-op delta variants
            const auto& store = facts_.store(rule.atoms[d].pred);
            if (delta_begin_.of(rule.atoms[d].pred) >=
                static_cast<int>(store.tuples.size()))
                continue;
            binding_.assign(rule.n_vars, -1);
            join(rule, rule.orders[d], 0, d, model, fresh);
        }
    }

    // Ranges per variant: atoms before the delta atom (original index) see
    // the full store, the delta atom sees only new tuples, atoms after see
    // only old ones. Every new combination is produced exactly once.
    Range range_for(int atom_index, int delta_index) const {
        if (atom_index < delta_index) return Range::Full;
        if (atom_index == delta_index) return Range::Delta;
        return Range::Old;
    }

    void join(const CompiledRule& rule, const std::vector<int>& order, int depth,
              int delta_index, LeastModel& model, std::vector<GroundAtom>& fresh) {
        if (depth == static_cast<int>(order.size())) {
            if (!checks_pass(rule)) return;
            emit(rule, model, fresh);
            return;
        }
        const int atom_index = order[depth];
        const auto& atom = rule.atoms[atom_index];
        const auto& store = facts_.store(atom.pred);
        const Range range = range_for(atom_index, delta_index);
        const int delta_begin = delta_begin_.of(atom.pred);
        const int size = static_cast<int>(store.tuples.size());
        int lo = 0, hi = size;
        if (range == Range::Delta) lo = delta_begin;
        if (range == Range::Old) hi = delta_begin;
        if (lo >= hi) return;

        const bool is_class = atom.pred.kind == PredKind::Class;
        int va = value_of(atom.a);
        int vb = is_class ? -1 : value_of(atom.b);

        auto try_tuple = [&](int idx) {
            if (idx < lo || idx >= hi) return;
            const auto [s, o] = store.tuples[idx];
            if (va >= 0 && s != va) return;
            if (!is_class && vb >= 0 && o != vb) return;
            // bind, rejecting tuples that alias one variable to two values
            int reset_a = -1, reset_b = -1;
            if (!is_const_slot(atom.a)) {
                if (binding_[atom.a] < 0) {
                    binding_[atom.a] = s;
                    reset_a = atom.a;
                } else if (binding_[atom.a] != s) {
                    return;
                }
            }
            if (!is_class && !is_const_slot(atom.b)) {
                if (binding_[atom.b] < 0) {
                    binding_[atom.b] = o;
                    reset_b = atom.b;
                } else if (binding_[atom.b] != o) {
                    if (reset_a >= 0) binding_[reset_a] = -1;
                    return;
                }
            }
            join(rule, order, depth + 1, delta_index, model, fresh);
            if (reset_a >= 0) binding_[reset_a] = -1;
            if (reset_b >= 0) binding_[reset_b] = -1;
        };

        if (va >= 0 && (is_class || vb >= 0)) {
            // fully bound: membership probe, then locate the tuple index range
            if (!store.contains(va, is_class ? -1 : vb)) return;
            auto [it, end] = store.by_subject.equal_range(va);
            for (; it != end; ++it) try_tuple(it->second);
        } else if (va >= 0) {
            auto [it, end] = store.by_subject.equal_range(va);
            for (; it != end; ++it) try_tuple(it->second);
        } else if (!is_class && vb >= 0) {
            auto [it, end] = store.by_object.equal_range(vb);
            for (; it != end; ++it) try_tuple(it->second);
        } else {
            for (int idx = lo; idx < hi; ++idx) try_tuple(idx);
        }
    }

    // current value of a slot, -1 if unbound variable
    int value_of(int slot) const {
        if (is_const_slot(slot)) return const_of_slot(slot);
        return binding_[slot];
    }

    bool checks_pass(const CompiledRule& rule) const {
        for (const auto& check : rule.checks)
            if (value_of(check.a) == value_of(check.b)) return false;
        return true;
    }

    void emit(const CompiledRule& rule, LeastModel& model,
              std::vector<GroundAtom>& fresh) {
        if (rule.constraint) {
            if (!model.inconsistent ||
                static_cast<int>(model.violations.size()) < kMaxRecordedViolations)
                record_violation(rule, model);
            model.inconsistent = true;
            return;
        }
        GroundAtom atom;
        atom.pred = rule.head_pred;
        atom.subject = value_of(rule.head_a);
        atom.object = rule.head_pred.kind == PredKind::Relation ? value_of(rule.head_b) : -1;
        if (!facts_.store(atom.pred).contains(atom.subject, atom.object))
            fresh.push_back(atom);
    }

    void record_violation(const CompiledRule& rule, LeastModel& model) {
        if (static_cast<int>(model.violations.size()) >= kMaxRecordedViolations) return;
        std::ostringstream out;
        out << "constraint violated:";
        for (const auto& atom : rule.atoms) {
            out << ' ';
            const int s = value_of(atom.a);
            if (atom.pred.kind == PredKind::Class)
                out << program_.vocab().class_name(atom.pred.id) << '(' << consts_.names[s]
                    << ')';
            else
                out << program_.vocab().relation_name(atom.pred.id) << '(' << consts_.names[s]
                    << ',' << consts_.names[value_of(atom.b)] << ')';
        }
        const std::string rendered = out.str();
        if (std::find(model.violations.begin(), model.violations.end(), rendered) ==
            model.violations.end())
            model.violations.push_back(rendered);
    }

    void check_negative_facts(LeastModel& model) {
        for (const auto& f : db_.facts()) {
            if (f.positive) continue;
            if (model.derived.count(f.atom) == 0) continue;
            model.inconsistent = true;
            if (static_cast<int>(model.violations.size()) < kMaxRecordedViolations) {
                const Literal lit = db_.to_literal({f.atom, true});
                std::string rendered = "fact conflicts with stated negation: " + lit.predicate;
                rendered += '(' + lit.args[0];
                if (lit.args.size() == 2) rendered += ',' + lit.args[1];
                rendered += ')';
                if (std::find(model.violations.begin(), model.violations.end(), rendered) ==
                    model.violations.end())
                    model.violations.push_back(rendered);
            }
        }
    }

    const Program& program_;
    const SampleKB& db_;
    ConstTable consts_;
    FactDatabase facts_;
    std::unique_ptr<RuleCompiler> compiler_;
    Boundaries delta_begin_;
    std::vector<int> binding_;
};

}  // namespace

LeastModel materialize(const Program& program, const SampleKB& db) {
    return SemiNaiveEngine(program, db).run();
}

LeastModel naive_fixpoint(const Program& program, const SampleKB& db) {
    ConstTable consts(db);
    for (const auto& rule : program.rules()) {
        auto intern_terms = [&](const Atom& atom) {
            for (const auto& t : atom.args)
                if (t.kind == Term::Constant) consts.intern(t.name);
        };
        intern_terms(rule.head);
        for (const auto& atom : rule.body) intern_terms(atom);
    }
    const int n_consts = static_cast<int>(consts.names.size());
    const auto& vocab = program.vocab();

    AtomSet model;
    std::vector<GroundAtom> order;
    auto add = [&](const GroundAtom& a) {
        if (model.insert(a).second) order.push_back(a);
    };
    for (const auto& f : db.facts())
        if (f.positive) add(f.atom);

    auto pred_ref = [&](const std::string& name) -> PredRef {
        if (auto cid = vocab.class_id(name)) return {PredKind::Class, *cid};
        if (auto rid = vocab.relation_id(name)) return {PredKind::Relation, *rid};
        throw KbError("predicate not in vocabulary: " + name);
    };

    LeastModel out;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& rule : program.rules()) {
            // collect named variables (each '_' is unconstrained and handled
            // by existential scan below)
            std::vector<std::string> vars;
            auto collect = [&](const Atom& atom) {
                if (atom.type == Atom::Bottom) return;
                for (const auto& t : atom.args)
                    if (t.kind == Term::Variable &&
                        std::find(vars.begin(), vars.end(), t.name) == vars.end())
                        vars.push_back(t.name);
            };
            collect(rule.head);
            for (const auto& atom : rule.body) collect(atom);

            const int n_vars = static_cast<int>(vars.size());
            double combos = 1;
            for (int i = 0; i < n_vars; ++i) combos *= n_consts;
            if (combos > 5e7)
                throw KbError("naive oracle: grounding space too large");

            std::vector<int> sub(n_vars, 0);
            auto term_value = [&](const Term& t) -> int {
                if (t.kind == Term::Constant) return consts.ids.at(t.name);
                for (int i = 0; i < n_vars; ++i)
                    if (vars[i] == t.name) return sub[i];
                return -1;  // anonymous
            };
            auto atom_holds = [&](const Atom& atom) -> bool {
                if (atom.type == Atom::Neq)
                    return term_value(atom.args[0]) != term_value(atom.args[1]);
                const PredRef p = pred_ref(atom.predicate);
                const int s = term_value(atom.args[0]);
                if (p.kind == PredKind::Class) {
                    if (s >= 0) return model.count(GroundAtom::cls(p.id, s)) > 0;
                    for (int c = 0; c < n_consts; ++c)
                        if (model.count(GroundAtom::cls(p.id, c)) > 0) return true;
                    return false;
                }
                const int o = term_value(atom.args[1]);
                if (s >= 0 && o >= 0) return model.count(GroundAtom::rel(p.id, s, o)) > 0;
                for (int cs = 0; cs < n_consts; ++cs) {
                    if (s >= 0 && cs != s) continue;
                    for (int co = 0; co < n_consts; ++co) {
                        if (o >= 0 && co != o) continue;
                        if (model.count(GroundAtom::rel(p.id, cs, co)) > 0) return true;
                    }
                }
                return false;
            };

            const std::size_t total =
                n_vars == 0 ? 1 : static_cast<std::size_t>(std::pow(n_consts, n_vars));
            for (std::size_t k = 0; k < total && n_consts > 0; ++k) {
                std::size_t rem = k;
                for (int i = 0; i < n_vars; ++i) {
                    sub[i] = static_cast<int>(rem % n_consts);
                    rem /= n_consts;
                }
                bool body_ok = true;
                for (const auto& atom : rule.body)
                    if (!atom_holds(atom)) {
                        body_ok = false;
                        break;
                    }
                if (!body_ok) continue;
                if (rule.is_constraint()) {
                    out.inconsistent = true;
                    continue;
                }
                const PredRef p = pred_ref(rule.head.predicate);
                GroundAtom atom;
                atom.pred = p;
                atom.subject = term_value(rule.head.args[0]);
                atom.object =
                    p.kind == PredKind::Relation ? term_value(rule.head.args[1]) : -1;
                if (model.count(atom) == 0) {
                    add(atom);
                    changed = true;
                }
            }
        }
    }

    for (const auto& f : db.facts()) {
        if (f.positive) continue;
        if (model.count(f.atom) > 0) out.inconsistent = true;
    }

    out.derived = std::move(model);
    out.derived_order = std::move(order);
    out.extra_constants.assign(consts.names.begin() + db.n_individuals(),
                               consts.names.end());
    return out;
}

namespace {

// Adds the positive form of `query` to a copy of the database, extending the
// roster with unseen constants, and reports whether that breaks consistency.
bool refuted_by_constraints(const Program& program, const SampleKB& db,
                            const Literal& query) {
    SampleKB extended(db.vocab_ptr(), db.provenance());
    for (const auto& name : db.individuals()) extended.add_individual(name);
    for (const auto& arg : query.args) extended.add_individual(arg);
    for (const auto& f : db.facts()) extended.add_fact(f.atom, f.positive, true);
    Literal positive = query;
    positive.positive = true;
    extended.add_literal(positive, true);
    return materialize(program, extended).inconsistent;
}

bool subject_known(const SampleKB& db, const Literal& query) {
    const auto subj = db.find_individual(query.args[0]);
    if (!subj) return false;
    const auto& vocab = db.vocab();
    if (query.args.size() == 1) {
        // class atom: any stated class membership of the subject
        for (int c = 0; c < vocab.n_classes(); ++c)
            if (db.has_any_polarity(GroundAtom::cls(c, *subj))) return true;
        return false;
    }
    const auto rid = vocab.relation_id(query.predicate);
    if (!rid) return false;
    for (int o = 0; o < db.n_individuals(); ++o)
        if (db.has_any_polarity(GroundAtom::rel(*rid, *subj, o))) return true;
    return false;
}

}  // namespace

EntailmentVerdict entails(const Program& program, const SampleKB& db,
                          const Literal& query, Semantics semantics) {
    for (const auto& arg : query.args)
        if (arg.empty() || std::isupper(static_cast<unsigned char>(arg[0])) || arg == "_")
            throw KbError("entailment query must be ground: " + arg);
    const auto& vocab = db.vocab();
    if (!vocab.class_id(query.predicate) && !vocab.relation_id(query.predicate))
        throw KbError("unknown predicate: " + query.predicate);

    // resolvable only if every constant is in the roster
    bool in_roster = true;
    for (const auto& arg : query.args)
        if (!db.find_individual(arg)) in_roster = false;

    const LeastModel model = materialize(program, db);
    bool in_model = false;
    if (in_roster) {
        Literal positive = query;
        positive.positive = true;
        in_model = model.contains(db.intern(positive));
    }

    bool verdict = false;
    if (query.positive) {
        verdict = in_model;
    } else {
        switch (semantics) {
            case Semantics::Plain:
                verdict = refuted_by_constraints(program, db, query);
                break;
            case Semantics::Cwa:
                verdict = !in_model;
                break;
            case Semantics::Lcwa:
                verdict = (!in_model && subject_known(db, query)) ||
                          refuted_by_constraints(program, db, query);
                break;
        }
    }
    return {verdict, semantics};
}

bool is_consistent(const Program& program, const SampleKB& db) {
    return !materialize(program, db).inconsistent;
}

std::vector<LabeledQuery> label_queries(const Program& program,
                                        const SampleKB& input_db,
                                        std::span<const GroundAtom> universe,
                                        const SampleKB* label_source,
                                        bool append_uncovered_facts) {
    const SampleKB& label_db = label_source ? *label_source : input_db;
    if (label_source && label_source->individuals() != input_db.individuals())
        throw KbError("label source roster differs from input roster");
    const LeastModel model = materialize(program, label_db);

    std::vector<LabeledQuery> out;
    out.reserve(universe.size());
    AtomSet covered;
    covered.reserve(universe.size() * 2);
    for (const auto& atom : universe) {
        covered.insert(atom);
        out.push_back({atom, model.contains(atom),
                       input_db.has_any_polarity(atom) ? QueryOrigin::Specified
                                                       : QueryOrigin::Inferable});
    }
    // facts outside the universe (base relations such as parentOf) become
    // extra specified queries so they are still evaluated
    if (append_uncovered_facts) {
        for (const auto& f : input_db.facts()) {
            if (covered.count(f.atom) > 0) continue;
            covered.insert(f.atom);
            out.push_back({f.atom, model.contains(f.atom), QueryOrigin::Specified});
        }
    }
    return out;
}

}  // namespace rrnlab
