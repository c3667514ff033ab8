#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "rrnlab/datagen.hpp"

namespace rrnlab {

namespace {

const char* kCountriesOntology = R"(@class country, region, subregion.
@relation locatedIn, neighborOf.

locatedIn(X,Z) :- locatedIn(X,Y), locatedIn(Y,Z).
neighborOf(X,Y) :- neighborOf(Y,X).

country(X) :- neighborOf(X,_).
subregion(Y) :- locatedIn(X,Y), locatedIn(Y,Z).
region(Z) :- locatedIn(Y,Z), subregion(Y).

false :- country(X), region(X).
false :- country(X), subregion(X).
false :- region(X), subregion(X).
)";

}  // namespace

const std::string& countries_ontology_text() {
    static const std::string text = kCountriesOntology;
    return text;
}

const Program& countries_ontology() {
    static const Program program = parse_program(countries_ontology_text());
    return program;
}

std::string to_string(CountriesVersion v) {
    switch (v) {
        case CountriesVersion::S1: return "s1";
        case CountriesVersion::S2: return "s2";
        case CountriesVersion::S3: return "s3";
    }
    return "s1";
}

std::optional<CountriesVersion> countries_version_from_string(const std::string& s) {
    if (s == "s1" || s == "S1") return CountriesVersion::S1;
    if (s == "s2" || s == "S2") return CountriesVersion::S2;
    if (s == "s3" || s == "S3") return CountriesVersion::S3;
    return std::nullopt;
}

WorldData WorldData::from_tsv(std::string_view text) {
    WorldData world;
    std::set<std::string> seen_regions, seen_subregions, seen_countries;
    int lineno = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++lineno;
        if (line.empty() || line[0] == '#') {
            if (end == text.size()) break;
            continue;
        }
        std::vector<std::string> fields;
        std::size_t fstart = 0;
        for (std::size_t i = 0; i <= line.size(); ++i)
            if (i == line.size() || line[i] == '\t') {
                fields.emplace_back(line.substr(fstart, i - fstart));
                fstart = i + 1;
            }
        if (fields.size() != 3) throw ParseError(lineno, 1, "expected 3 fields");
        if (fields[0] == "neighbor") {
            world.neighbors.emplace_back(fields[1], fields[2]);
        } else {
            world.countries.push_back({fields[0], fields[1], fields[2]});
            if (!seen_countries.insert(fields[0]).second)
                throw ParseError(lineno, 1, "duplicate country: " + fields[0]);
            if (seen_regions.insert(fields[1]).second) world.regions.push_back(fields[1]);
            if (seen_subregions.insert(fields[2]).second)
                world.subregions.push_back(fields[2]);
        }
        if (end == text.size()) break;
    }
    // normalize neighbor pairs: unordered, deduplicated, no self loops
    std::set<std::pair<std::string, std::string>> pairs;
    std::vector<std::pair<std::string, std::string>> normalized;
    for (auto& [a, b] : world.neighbors) {
        if (a == b) throw KbError("country cannot neighbor itself: " + a);
        auto p = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
        if (pairs.insert(p).second) normalized.push_back(p);
    }
    world.neighbors = std::move(normalized);
    world.validate();
    return world;
}

std::string WorldData::to_tsv() const {
    std::ostringstream out;
    for (const auto& c : countries)
        out << c.name << '\t' << c.region << '\t' << c.subregion << '\n';
    for (const auto& [a, b] : neighbors) out << "neighbor\t" << a << '\t' << b << '\n';
    return out.str();
}

void WorldData::validate() const {
    std::map<std::string, std::string> subregion_region;
    std::set<std::string> names;
    for (const auto& c : countries) {
        if (c.name == "neighbor") throw KbError("'neighbor' is a reserved world token");
        names.insert(c.name);
        auto [it, fresh] = subregion_region.emplace(c.subregion, c.region);
        if (!fresh && it->second != c.region)
            throw KbError("subregion " + c.subregion + " assigned to two regions");
    }
    for (const auto& [a, b] : neighbors)
        if (names.count(a) == 0 || names.count(b) == 0)
            throw KbError("neighbor pair mentions unknown country: " + a + "/" + b);
}

const WorldData::Country* WorldData::find(const std::string& name) const {
    for (const auto& c : countries)
        if (c.name == name) return &c;
    return nullptr;
}

WorldData WorldData::synthesize(int n_regions, int subregions_per_region,
                                int countries_per_subregion, std::uint64_t seed) {
    if (n_regions <= 0 || subregions_per_region <= 0 || countries_per_subregion < 2)
        throw KbError("synthetic world needs positive sizes (>=2 countries/subregion)");
    WorldData world;
    Rng rng(derive_seed(seed, 0xC0FFEE));

    std::vector<std::vector<int>> by_subregion;
    int counter = 0;
    for (int r = 0; r < n_regions; ++r) {
        const std::string region = "r" + std::to_string(r);
        world.regions.push_back(region);
        for (int s = 0; s < subregions_per_region; ++s) {
            const std::string subregion = region + "s" + std::to_string(s);
            world.subregions.push_back(subregion);
            std::vector<int> members;
            for (int c = 0; c < countries_per_subregion; ++c) {
                char name[16];
                std::snprintf(name, sizeof(name), "c%03d", counter++);
                world.countries.push_back({name, region, subregion});
                members.push_back(static_cast<int>(world.countries.size()) - 1);
            }
            by_subregion.push_back(std::move(members));
        }
    }

    std::set<std::pair<int, int>> edges;
    auto connect = [&](int a, int b) {
        if (a == b) return;
        edges.insert(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
    };
    // ring inside each subregion, doubled with skip-2 chords so the border
    // graph stays connected when many countries are held out
    for (const auto& members : by_subregion) {
        const int m = static_cast<int>(members.size());
        for (int i = 0; i + 1 < m; ++i) connect(members[i], members[i + 1]);
        if (m >= 3) connect(members[m - 1], members[0]);
        if (m >= 5)
            for (int i = 0; i < m; ++i) connect(members[i], members[(i + 2) % m]);
    }
    // chain subregions into a global ring through border countries
    const int n_sub = static_cast<int>(by_subregion.size());
    for (int s = 0; s < n_sub && n_sub > 1; ++s) {
        const auto& cur = by_subregion[s];
        const auto& next = by_subregion[(s + 1) % n_sub];
        connect(cur.back(), next.front());
    }
    // sprinkle a few extra borders inside subregions
    for (const auto& members : by_subregion) {
        if (members.size() >= 4 && rng.bernoulli(0.6)) {
            const int a = static_cast<int>(rng.uniform_int(members.size()));
            const int b = static_cast<int>(rng.uniform_int(members.size()));
            connect(members[a], members[b]);
        }
    }

    for (const auto& [a, b] : edges)
        world.neighbors.emplace_back(world.countries[a].name, world.countries[b].name);
    std::sort(world.neighbors.begin(), world.neighbors.end());
    world.validate();
    return world;
}

namespace {

struct WorldSample {
    SampleKB full;     // all facts
    SampleKB reduced;  // facts after the per-version drops
};

// Roster order is countries, then subregions, then regions, identical for
// the full and the reduced build, so labels computed against the full facts
// line up with the reduced sample's ids.
WorldSample build_world_sample(const WorldData& world,
                               const std::vector<int>& test_countries,
                               CountriesVersion version) {
    const Program& program = countries_ontology();
    SampleKB full(program.vocab_ptr());
    const auto& vocab = program.vocab();
    const int located = *vocab.relation_id("locatedIn");
    const int neighbor = *vocab.relation_id("neighborOf");

    for (const auto& c : world.countries) full.add_individual(c.name);
    for (const auto& s : world.subregions) full.add_individual(s);
    for (const auto& r : world.regions) full.add_individual(r);

    std::vector<char> is_test(world.countries.size(), 0);
    for (int t : test_countries) is_test.at(t) = 1;

    std::set<int> dropped_region_of;  // country indexes whose region fact drops
    std::set<int> dropped_subregion_of;
    for (std::size_t i = 0; i < world.countries.size(); ++i) {
        if (!is_test[i]) continue;
        dropped_region_of.insert(static_cast<int>(i));
        if (version != CountriesVersion::S1)
            dropped_subregion_of.insert(static_cast<int>(i));
    }
    if (version == CountriesVersion::S3) {
        std::map<std::string, int> index_of;
        for (std::size_t i = 0; i < world.countries.size(); ++i)
            index_of[world.countries[i].name] = static_cast<int>(i);
        for (const auto& [a, b] : world.neighbors) {
            const int ia = index_of.at(a), ib = index_of.at(b);
            if (is_test[ia]) dropped_region_of.insert(ib);
            if (is_test[ib]) dropped_region_of.insert(ia);
        }
    }

    SampleKB reduced(program.vocab_ptr());
    for (const auto& name : full.individuals()) reduced.add_individual(name);

    auto add_both = [&](const GroundAtom& atom, bool keep) {
        full.add_fact(atom, true);
        if (keep) reduced.add_fact(atom, true);
    };
    for (std::size_t i = 0; i < world.countries.size(); ++i) {
        const auto& c = world.countries[i];
        const int ci = full.individual_id(c.name);
        add_both(GroundAtom::rel(located, ci, full.individual_id(c.subregion)),
                 dropped_subregion_of.count(static_cast<int>(i)) == 0);
        add_both(GroundAtom::rel(located, ci, full.individual_id(c.region)),
                 dropped_region_of.count(static_cast<int>(i)) == 0);
    }
    for (const auto& s : world.subregions) {
        // subregion's region comes from any member country
        for (const auto& c : world.countries)
            if (c.subregion == s) {
                add_both(GroundAtom::rel(located, full.individual_id(s),
                                         full.individual_id(c.region)),
                         true);
                break;
            }
    }
    for (const auto& [a, b] : world.neighbors) {
        add_both(GroundAtom::rel(neighbor, full.individual_id(a), full.individual_id(b)),
                 true);
        add_both(GroundAtom::rel(neighbor, full.individual_id(b), full.individual_id(a)),
                 true);
    }
    return {std::move(full), std::move(reduced)};
}

std::vector<int> pick_test_countries(const WorldData& world,
                                     const std::vector<int>& pool, int count,
                                     const std::vector<std::vector<int>>& adjacency,
                                     Rng& rng) {
    if (static_cast<int>(pool.size()) <= count)
        throw KbError("world too small to satisfy the neighbor constraint");
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<int> shuffled = pool;
        rng.shuffle(shuffled);
        shuffled.resize(count);
        std::set<int> chosen(shuffled.begin(), shuffled.end());
        bool ok = true;
        for (int c : shuffled) {
            bool outside = false;
            for (int nb : adjacency[c])
                if (chosen.count(nb) == 0) {
                    outside = true;
                    break;
                }
            if (!outside) {
                ok = false;
                break;
            }
        }
        if (ok) {
            std::sort(shuffled.begin(), shuffled.end());
            return shuffled;
        }
    }
    throw KbError("world too small to satisfy the neighbor constraint");
    (void)world;
}

std::vector<std::vector<int>> world_adjacency(const WorldData& world) {
    std::map<std::string, int> index_of;
    for (std::size_t i = 0; i < world.countries.size(); ++i)
        index_of[world.countries[i].name] = static_cast<int>(i);
    std::vector<std::vector<int>> adj(world.countries.size());
    for (const auto& [a, b] : world.neighbors) {
        adj[index_of.at(a)].push_back(index_of.at(b));
        adj[index_of.at(b)].push_back(index_of.at(a));
    }
    return adj;
}

}  // namespace

DatasetManifest generate_countries_dataset(const WorldData& world,
                                           const CountriesGenConfig& cfg,
                                           const std::filesystem::path& out_dir) {
    world.validate();
    if (static_cast<int>(world.countries.size()) < 60)
        throw KbError("countries generation needs a world of at least 60 countries");

    const Program& program = countries_ontology();
    const auto derived = program.derived_relation_ids();

    DatasetManifest manifest;
    manifest.name = "countries";
    manifest.version = to_string(cfg.version);
    manifest.seed = cfg.seed;
    manifest.params = {{"n_train", cfg.n_train},
                       {"n_test_countries", cfg.n_test_countries},
                       {"version", to_string(cfg.version)}};

    write_file(out_dir / manifest.ontology_file, countries_ontology_text());

    const auto adjacency = world_adjacency(world);
    std::vector<int> all(world.countries.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);

    Rng pick_rng(derive_seed(cfg.seed, 0x7e57));
    const auto eval_set =
        pick_test_countries(world, all, cfg.n_test_countries, adjacency, pick_rng);
    std::vector<int> rest;
    for (int i : all)
        if (!std::binary_search(eval_set.begin(), eval_set.end(), i)) rest.push_back(i);
    const auto test_set =
        pick_test_countries(world, rest, cfg.n_test_countries, adjacency, pick_rng);

    // held-out samples: full world with the respective test set degraded
    auto emit_holdout = [&](const std::string& split, const std::vector<int>& countries) {
        WorldSample s = build_world_sample(world, countries, cfg.version);
        std::vector<int> test_ids, class_ids;
        for (int c : countries)
            test_ids.push_back(s.reduced.individual_id(world.countries[c].name));
        for (const auto& name : world.subregions)
            class_ids.push_back(s.reduced.individual_id(name));
        for (const auto& name : world.regions)
            class_ids.push_back(s.reduced.individual_id(name));
        const auto universe = query_universe(
            s.reduced, derived, QueryScope::touching(test_ids, class_ids));
        const auto labels =
            label_queries(program, s.reduced, universe, &s.full, false);
        const std::string rel = split + "/sample_0000.tsv";
        write_file(out_dir / rel, sample_to_tsv(s.reduced));
        write_file(out_dir / "labels" / rel, labels_to_tsv(s.reduced, labels));
        manifest.splits[split].push_back(rel);
        nlohmann::json names = nlohmann::json::array();
        for (int c : countries) names.push_back(world.countries[c].name);
        manifest.params[split + "_countries"] = names;
    };
    emit_holdout("eval", eval_set);
    emit_holdout("test", test_set);

    // training world: the 40 held-out countries are removed entirely
    std::set<std::string> removed;
    for (int c : eval_set) removed.insert(world.countries[c].name);
    for (int c : test_set) removed.insert(world.countries[c].name);
    WorldData train_world;
    train_world.regions = world.regions;
    train_world.subregions = world.subregions;
    for (const auto& c : world.countries)
        if (removed.count(c.name) == 0) train_world.countries.push_back(c);
    for (const auto& [a, b] : world.neighbors)
        if (removed.count(a) == 0 && removed.count(b) == 0)
            train_world.neighbors.emplace_back(a, b);
    train_world.validate();

    const auto train_adjacency = world_adjacency(train_world);
    std::vector<int> train_all(train_world.countries.size());
    for (std::size_t i = 0; i < train_all.size(); ++i)
        train_all[i] = static_cast<int>(i);

    for (int i = 0; i < cfg.n_train; ++i) {
        Rng rng(derive_seed(cfg.seed, 0x7a11, static_cast<std::uint64_t>(i)));
        const auto sample_test = pick_test_countries(
            train_world, train_all, cfg.n_test_countries, train_adjacency, rng);
        WorldSample s = build_world_sample(train_world, sample_test, cfg.version);
        const auto universe = query_universe(s.reduced, derived);
        const auto labels = label_queries(program, s.reduced, universe, &s.full);
        char name[64];
        std::snprintf(name, sizeof(name), "train/sample_%04d.tsv", i);
        write_file(out_dir / name, sample_to_tsv(s.reduced));
        write_file(out_dir / "labels" / name, labels_to_tsv(s.reduced, labels));
        manifest.splits["train"].push_back(name);
    }

    write_manifest(out_dir, manifest);
    return manifest;
}

}  // namespace rrnlab
