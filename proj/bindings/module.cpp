#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rrnlab/cli.hpp"
#include "rrnlab/harness.hpp"

namespace py = pybind11;
using namespace rrnlab;

namespace {

py::object json_to_py(const nlohmann::json& j) {
    switch (j.type()) {
        case nlohmann::json::value_t::null: return py::none();
        case nlohmann::json::value_t::boolean: return py::bool_(j.get<bool>());
        case nlohmann::json::value_t::number_integer:
            return py::int_(j.get<std::int64_t>());
        case nlohmann::json::value_t::number_unsigned:
            return py::int_(j.get<std::uint64_t>());
        case nlohmann::json::value_t::number_float:
            return py::float_(j.get<double>());
        case nlohmann::json::value_t::string: return py::str(j.get<std::string>());
        case nlohmann::json::value_t::array: {
            py::list out;
            for (const auto& item : j) out.append(json_to_py(item));
            return out;
        }
        case nlohmann::json::value_t::object: {
            py::dict out;
            for (auto it = j.begin(); it != j.end(); ++it)
                out[py::str(it.key())] = json_to_py(it.value());
            return out;
        }
        default: return py::none();
    }
}

SampleKB build_sample(const Program& program, const std::string& facts_text) {
    const auto lits = parse_facts(facts_text, &program.vocab());
    return sample_from_literals(program.vocab_ptr(), lits, "python", true);
}

Semantics semantics_from(const std::string& s) {
    if (s == "plain") return Semantics::Plain;
    if (s == "cwa") return Semantics::Cwa;
    if (s == "lcwa") return Semantics::Lcwa;
    throw KbError("semantics must be plain|cwa|lcwa");
}

Literal literal_from(const Program& program, const std::string& query) {
    std::string text = query;
    if (text.empty()) throw KbError("empty query");
    if (text.back() != '.') text += '.';
    const auto lits = parse_facts(text, &program.vocab());
    if (lits.size() != 1) throw KbError("expected exactly one query literal");
    return lits[0];
}

py::list triples_to_py(const SampleKB& names, const Vocabulary& vocab,
                       const std::vector<GroundAtom>& atoms,
                       const std::vector<std::string>& extra) {
    auto name_of = [&](int id) -> std::string {
        if (id < names.n_individuals()) return names.individual_name(id);
        return extra.at(id - names.n_individuals());
    };
    py::list out;
    for (const auto& atom : atoms) {
        if (atom.pred.kind == PredKind::Class)
            out.append(py::make_tuple(name_of(atom.subject), Vocabulary::kMemberToken,
                                      vocab.class_name(atom.pred.id)));
        else
            out.append(py::make_tuple(name_of(atom.subject),
                                      vocab.relation_name(atom.pred.id),
                                      name_of(atom.object)));
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Ontology-reasoning workbench: Datalog-style oracle, benchmark "
              "generators, and a recursive reasoning network.";

    py::register_exception<KbError>(m, "KbError");
    py::register_exception<ParseError>(m, "ParseLocationError");

    py::class_<Program>(m, "Program")
        .def_static("parse", [](const std::string& text) { return parse_program(text); })
        .def_property_readonly(
            "classes", [](const Program& p) { return p.vocab().classes(); })
        .def_property_readonly(
            "relations", [](const Program& p) { return p.vocab().relations(); })
        .def_property_readonly(
            "n_rules", [](const Program& p) { return p.rules().size(); })
        .def_property_readonly("derived_relations",
                               [](const Program& p) {
                                   std::vector<std::string> out;
                                   for (int r : p.derived_relation_ids())
                                       out.push_back(p.vocab().relation_name(r));
                                   return out;
                               })
        .def("serialize", [](const Program& p) { return serialize_program(p); })
        .def("__eq__", [](const Program& a, const Program& b) { return a == b; });

    m.def("family_ontology", []() { return family_ontology(); },
          "Built-in 28-relation kinship ontology over parentOf and genders.");
    m.def("countries_ontology", []() { return countries_ontology(); });

    m.def(
        "materialize",
        [](const Program& program, const std::string& facts) {
            const SampleKB db = build_sample(program, facts);
            const LeastModel model = rrnlab::materialize(program, db);
            py::dict out;
            out["derived"] = triples_to_py(db, program.vocab(), model.derived_order,
                                           model.extra_constants);
            out["consistent"] = !model.inconsistent;
            out["violations"] = model.violations;
            return out;
        },
        py::arg("program"), py::arg("facts"),
        "Least model of ontology + facts (facts in TSV or inline syntax).");

    m.def(
        "entails",
        [](const Program& program, const std::string& facts, const std::string& query,
           const std::string& semantics) {
            const SampleKB db = build_sample(program, facts);
            return rrnlab::entails(program, db, literal_from(program, query),
                                   semantics_from(semantics))
                .entailed;
        },
        py::arg("program"), py::arg("facts"), py::arg("query"),
        py::arg("semantics") = "cwa");

    m.def(
        "label_queries",
        [](const Program& program, const std::string& facts) {
            const SampleKB db = build_sample(program, facts);
            const auto derived = program.derived_relation_ids();
            const auto universe = query_universe(db, derived);
            const auto labels = rrnlab::label_queries(program, db, universe);
            py::list out;
            for (const auto& q : labels) {
                py::dict row;
                const auto& vocab = program.vocab();
                if (q.atom.pred.kind == PredKind::Class) {
                    row["subject"] = db.individual_name(q.atom.subject);
                    row["predicate"] = Vocabulary::kMemberToken;
                    row["object"] = vocab.class_name(q.atom.pred.id);
                } else {
                    row["subject"] = db.individual_name(q.atom.subject);
                    row["predicate"] = vocab.relation_name(q.atom.pred.id);
                    row["object"] = db.individual_name(q.atom.object);
                }
                row["label"] = q.label;
                row["origin"] =
                    q.origin == QueryOrigin::Specified ? "specified" : "inferable";
                out.append(row);
            }
            return out;
        },
        py::arg("program"), py::arg("facts"),
        "CWA labels over the full query universe.");

    m.def(
        "incidence_vector",
        [](const Program& program, const std::string& facts,
           const std::string& individual) {
            const SampleKB db = build_sample(program, facts);
            const auto v = rrnlab::incidence_vector(db, individual);
            return std::vector<int>(v.begin(), v.end());
        },
        py::arg("program"), py::arg("facts"), py::arg("individual"));

    m.def(
        "generate_family_dataset",
        [](const std::string& out_dir, std::uint64_t seed, int n_train, int n_eval,
           int n_test, int max_people) {
            FamilyDatasetConfig cfg;
            cfg.seed = seed;
            cfg.n_train = n_train;
            cfg.n_eval = n_eval;
            cfg.n_test = n_test;
            cfg.family.max_people = max_people;
            return json_to_py(generate_family_dataset(cfg, out_dir).to_json());
        },
        py::arg("out_dir"), py::arg("seed"), py::arg("n_train") = 500,
        py::arg("n_eval") = 50, py::arg("n_test") = 100, py::arg("max_people") = 26);

    m.def(
        "generate_countries_dataset",
        [](const std::string& out_dir, const std::string& version, std::uint64_t seed,
           int n_train, const std::string& world_tsv, int synth_regions,
           int synth_subregions, int synth_countries) {
            CountriesGenConfig cfg;
            const auto v = countries_version_from_string(version);
            if (!v) throw KbError("unknown countries version: " + version);
            cfg.version = *v;
            cfg.seed = seed;
            cfg.n_train = n_train;
            const WorldData world =
                world_tsv.empty()
                    ? WorldData::synthesize(synth_regions, synth_subregions,
                                            synth_countries, derive_seed(seed, 0x3a17d))
                    : WorldData::from_tsv(world_tsv);
            return json_to_py(generate_countries_dataset(world, cfg, out_dir).to_json());
        },
        py::arg("out_dir"), py::arg("version"), py::arg("seed"),
        py::arg("n_train") = 100, py::arg("world_tsv") = "",
        py::arg("synth_regions") = 6, py::arg("synth_subregions") = 3,
        py::arg("synth_countries") = 7);

    m.def(
        "train",
        [](const std::string& data_dir, const std::string& out_dir, std::uint64_t seed,
           int epochs, int patience, int dim, int hidden, int passes, double lr,
           bool quiet) {
            TrainConfig cfg;
            cfg.seed = seed;
            cfg.max_epochs = epochs;
            cfg.patience = patience;
            cfg.hp.embedding_dim = dim;
            cfg.hp.hidden_dim = hidden;
            cfg.hp.passes = passes;
            cfg.hp.learning_rate = lr;
            cfg.quiet = quiet;
            const LoadedDataset dataset = load_dataset(data_dir);
            const TrainResult r = rrnlab::train(dataset, cfg, out_dir);
            py::dict out;
            out["checkpoint"] = r.checkpoint_path.string();
            out["epochs_run"] = r.epochs_run;
            out["best_eval_loss"] = r.best_eval_loss;
            out["train_losses"] = r.train_losses;
            return out;
        },
        py::arg("data_dir"), py::arg("out_dir"), py::arg("seed"),
        py::arg("epochs") = 60, py::arg("patience") = 5, py::arg("dim") = 32,
        py::arg("hidden") = 64, py::arg("passes") = 8, py::arg("lr") = 1e-3,
        py::arg("quiet") = true);

    m.def(
        "evaluate",
        [](const std::string& checkpoint, const std::string& data_dir,
           const std::string& split, std::uint64_t seed, int jobs) {
            const Checkpoint ck = load_checkpoint(checkpoint);
            const LoadedDataset dataset = load_dataset(data_dir, {split});
            return json_to_py(rrnlab::evaluate(ck, dataset, split, seed, jobs).to_json());
        },
        py::arg("checkpoint"), py::arg("data_dir"), py::arg("split") = "test",
        py::arg("seed") = 0, py::arg("jobs") = 1);

    m.def(
        "run_experiment",
        [](const std::string& mode, const std::string& checkpoint,
           const std::string& data_dir, const std::string& split, std::uint64_t seed) {
            const Checkpoint ck = load_checkpoint(checkpoint);
            const LoadedDataset dataset = load_dataset(data_dir, {split});
            const ExperimentReport report =
                mode == "missing"
                    ? run_missing_fact_experiment(ck, dataset, split, seed)
                    : run_conflict_experiment(ck, dataset, split, seed);
            return json_to_py(report.to_json());
        },
        py::arg("mode"), py::arg("checkpoint"), py::arg("data_dir"),
        py::arg("split") = "test", py::arg("seed") = 0);

    m.def(
        "export_embeddings",
        [](const std::string& checkpoint, const std::string& data_dir,
           const std::string& split, int index, std::uint64_t seed) {
            const Checkpoint ck = load_checkpoint(checkpoint);
            const LoadedDataset dataset = load_dataset(data_dir, {split});
            return rrnlab::export_embeddings(ck, dataset.splits.at(split).at(index),
                                             seed);
        },
        py::arg("checkpoint"), py::arg("data_dir"), py::arg("split") = "test",
        py::arg("index") = 0, py::arg("seed") = 0);

    m.def(
        "run_cli", [](const std::vector<std::string>& args) { return run_cli(args); },
        py::arg("args"), "Invoke the command-line interface in-process.");
}
