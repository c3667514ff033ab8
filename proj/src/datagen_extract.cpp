#include <algorithm>
#include <iostream>

#include "rrnlab/datagen.hpp"

namespace rrnlab {

BfsResult extract_bfs_subgraph(const SampleKB& dump, const std::string& start,
                               int n, Rng& rng) {
    if (dump.facts().empty()) throw KbError("cannot extract from an empty dump");
    const int start_id = dump.individual_id(start);
    const int total = dump.n_individuals();

    std::vector<std::vector<int>> adjacency(total);
    for (const auto& f : dump.facts()) {
        if (f.atom.pred.kind != PredKind::Relation) continue;
        adjacency[f.atom.subject].push_back(f.atom.object);
        adjacency[f.atom.object].push_back(f.atom.subject);
    }

    std::vector<char> discovered(total, 0);
    std::vector<int> order;
    std::vector<int> queue;
    std::size_t head = 0;
    discovered[start_id] = 1;
    order.push_back(start_id);
    queue.push_back(start_id);
    while (head < queue.size() && static_cast<int>(order.size()) < n) {
        const int u = queue[head++];
        std::vector<int> next;
        for (int v : adjacency[u])
            if (!discovered[v]) {
                discovered[v] = 1;
                next.push_back(v);
            }
        rng.shuffle(next);
        for (int v : next) {
            if (static_cast<int>(order.size()) >= n) break;
            order.push_back(v);
            queue.push_back(v);
        }
    }

    const bool exhausted = static_cast<int>(order.size()) < n;
    if (exhausted)
        std::cerr << "[rrnlab] bfs component exhausted at " << order.size() << " of " << n
                  << " individuals (start " << start << ")\n";

    SampleKB sample(dump.vocab_ptr(),
                    "bfs start=" + start + " n=" + std::to_string(n));
    std::vector<int> new_id(total, -1);
    for (int id : order) new_id[id] = sample.add_individual(dump.individual_name(id));
    for (const auto& f : dump.facts()) {
        if (new_id[f.atom.subject] < 0) continue;
        if (f.atom.pred.kind == PredKind::Relation && new_id[f.atom.object] < 0) continue;
        GroundAtom atom = f.atom;
        atom.subject = new_id[atom.subject];
        if (atom.pred.kind == PredKind::Relation) atom.object = new_id[atom.object];
        sample.add_fact(atom, f.positive, true);
    }
    return {std::move(sample), exhausted};
}

std::vector<LabeledQuery> sample_negatives(const SampleKB& sample,
                                           std::span<const LabeledQuery> positives,
                                           int ratio, Rng& rng) {
    if (ratio < 1) throw KbError("negative sampling ratio must be >= 1");
    AtomSet closure;
    for (const auto& q : positives)
        if (q.label) closure.insert(q.atom);

    std::vector<LabeledQuery> out;
    AtomSet emitted;
    const int n = sample.n_individuals();
    for (const auto& q : positives) {
        if (!q.label || q.atom.pred.kind != PredKind::Relation) continue;
        for (int slot = 0; slot < ratio; ++slot) {
            for (int attempt = 0; attempt < 100; ++attempt) {
                GroundAtom candidate = q.atom;
                const int replacement = static_cast<int>(rng.uniform_int(n));
                if (rng.bernoulli(0.5))
                    candidate.subject = replacement;
                else
                    candidate.object = replacement;
                if (closure.count(candidate) > 0) continue;
                if (!emitted.insert(candidate).second) continue;
                out.push_back({candidate, false, QueryOrigin::Inferable});
                break;
            }
        }
    }
    return out;
}

std::pair<SampleKB, Literal> corrupt_missing(const Program& program,
                                             const SampleKB& sample, Rng& rng) {
    if (sample.facts().empty()) throw KbError("sample has no facts to remove");

    auto without = [&](std::size_t skip) {
        SampleKB copy(sample.vocab_ptr(), sample.provenance());
        for (const auto& name : sample.individuals()) copy.add_individual(name);
        for (std::size_t i = 0; i < sample.facts().size(); ++i)
            if (i != skip)
                copy.add_fact(sample.facts()[i].atom, sample.facts()[i].positive, true);
        return copy;
    };

    std::vector<std::size_t> qualifying;
    for (std::size_t i = 0; i < sample.facts().size(); ++i) {
        const auto& f = sample.facts()[i];
        if (!f.positive) {
            qualifying.push_back(i);  // negated facts are never re-derivable
            continue;
        }
        const LeastModel m = materialize(program, without(i));
        if (!m.contains(f.atom)) qualifying.push_back(i);
    }
    if (qualifying.empty())
        throw KbError("every fact is re-derivable; nothing to remove");

    const std::size_t chosen = qualifying[rng.uniform_int(qualifying.size())];
    SampleKB corrupted = without(chosen);
    corrupted.set_provenance(sample.provenance() + " missing-fact");
    return {std::move(corrupted), sample.to_literal(sample.facts()[chosen])};
}

std::pair<SampleKB, Literal> corrupt_conflict(const SampleKB& sample, Rng& rng) {
    if (sample.facts().empty()) throw KbError("sample has no facts to conflict");
    const auto& fact = sample.facts()[rng.uniform_int(sample.facts().size())];
    SampleKB corrupted = clone_sample(sample);
    corrupted.set_provenance(sample.provenance() + " conflict");
    corrupted.add_fact(fact.atom, !fact.positive, /*allow_contradiction=*/true);
    return {std::move(corrupted), sample.to_literal(fact)};
}

}  // namespace rrnlab
