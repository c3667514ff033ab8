#include "rrnlab/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "rrnlab/harness.hpp"

namespace rrnlab {

namespace {

namespace fs = std::filesystem;

fs::path default_out() {
    if (const char* env = std::getenv("RRNLAB_OUT")) return env;
    return ".";
}

void write_run_json(const fs::path& out_dir, const std::string& subcommand,
                    const nlohmann::json& config) {
    nlohmann::json j;
    j["subcommand"] = subcommand;
    j["config"] = config;
    write_file(out_dir / "run.json", j.dump(2) + "\n");
}

Literal parse_query(const std::string& text, const Vocabulary& vocab) {
    std::string fact = text;
    while (!fact.empty() && std::isspace(static_cast<unsigned char>(fact.back())))
        fact.pop_back();
    if (!fact.empty() && fact.front() == '?') fact.erase(fact.begin());
    if (fact.empty() || fact.back() != '.') fact += '.';
    const auto lits = parse_facts(fact, &vocab);
    if (lits.size() != 1) throw KbError("expected exactly one query literal");
    return lits[0];
}

struct GenerateFamilyArgs {
    FamilyDatasetConfig cfg;
    std::string out;
};

struct GenerateCountriesArgs {
    CountriesGenConfig cfg;
    std::string world_file;
    std::string synth_spec;  // RxSxC alternative to a world file
    std::string version = "s1";
    std::string out;
};

WorldData resolve_world(const GenerateCountriesArgs& a) {
    if (!a.world_file.empty()) return WorldData::from_tsv(read_file(a.world_file));
    if (a.synth_spec.empty())
        throw KbError("countries generation needs --world FILE or --synth-world RxSxC");
    int r = 0, s = 0, c = 0;
    if (std::sscanf(a.synth_spec.c_str(), "%dx%dx%d", &r, &s, &c) != 3)
        throw KbError("--synth-world expects RxSxC, e.g. 6x3x7");
    return WorldData::synthesize(r, s, c, derive_seed(a.cfg.seed, 0x3a17d));
}

int cmd_generate_family(const GenerateFamilyArgs& a) {
    const fs::path out = a.out;
    generate_family_dataset(a.cfg, out);
    write_run_json(out, "generate family",
                   {{"seed", a.cfg.seed},
                    {"n_train", a.cfg.n_train},
                    {"n_eval", a.cfg.n_eval},
                    {"n_test", a.cfg.n_test},
                    {"max_people", a.cfg.family.max_people},
                    {"max_depth", a.cfg.family.max_depth},
                    {"max_branching", a.cfg.family.max_branching},
                    {"stop_probability", a.cfg.family.stop_probability},
                    {"out", out.string()}});
    std::cerr << "[rrnlab] family dataset written to " << out << "\n";
    return 0;
}

int cmd_generate_countries(GenerateCountriesArgs& a) {
    const auto version = countries_version_from_string(a.version);
    if (!version) throw KbError("unknown countries version: " + a.version);
    a.cfg.version = *version;
    const WorldData world = resolve_world(a);
    const fs::path out = a.out;
    generate_countries_dataset(world, a.cfg, out);
    write_file(out / "world.tsv", world.to_tsv());
    write_run_json(out, "generate countries",
                   {{"seed", a.cfg.seed},
                    {"version", a.version},
                    {"n_train", a.cfg.n_train},
                    {"world", a.world_file},
                    {"synth_world", a.synth_spec},
                    {"out", out.string()}});
    std::cerr << "[rrnlab] countries dataset written to " << out << "\n";
    return 0;
}

struct ReasonArgs {
    std::string ontology, facts, query, semantics = "cwa", out;
};

int cmd_reason(const ReasonArgs& a) {
    const Program program = parse_program(read_file(a.ontology));
    const auto lits = parse_facts(read_file(a.facts), &program.vocab());
    const SampleKB db = sample_from_literals(program.vocab_ptr(), lits, a.facts, true);
    Semantics semantics;
    if (a.semantics == "plain")
        semantics = Semantics::Plain;
    else if (a.semantics == "cwa")
        semantics = Semantics::Cwa;
    else if (a.semantics == "lcwa")
        semantics = Semantics::Lcwa;
    else
        throw KbError("semantics must be plain|cwa|lcwa");
    const Literal query = parse_query(a.query, program.vocab());
    const EntailmentVerdict verdict = entails(program, db, query, semantics);
    std::cout << (verdict.entailed ? "entailed" : "not-entailed") << " [" << a.semantics
              << "]\n";
    const fs::path out = a.out.empty() ? default_out() : fs::path(a.out);
    write_run_json(out, "reason",
                   {{"ontology", a.ontology},
                    {"facts", a.facts},
                    {"query", a.query},
                    {"semantics", a.semantics},
                    {"entailed", verdict.entailed}});
    return 0;
}

struct MaterializeArgs {
    std::string ontology, facts, out;
};

int cmd_materialize(const MaterializeArgs& a) {
    const Program program = parse_program(read_file(a.ontology));
    const auto lits = parse_facts(read_file(a.facts), &program.vocab());
    const SampleKB db = sample_from_literals(program.vocab_ptr(), lits, a.facts, true);
    const LeastModel model = materialize(program, db);
    const fs::path out = a.out.empty() ? default_out() : fs::path(a.out);

    std::vector<std::string> names = db.individuals();
    names.insert(names.end(), model.extra_constants.begin(),
                 model.extra_constants.end());
    std::ostringstream tsv;
    for (const auto& atom : model.derived_order) {
        if (atom.pred.kind == PredKind::Class)
            tsv << names[atom.subject] << '\t' << Vocabulary::kMemberToken << '\t'
                << program.vocab().class_name(atom.pred.id);
        else
            tsv << names[atom.subject] << '\t'
                << program.vocab().relation_name(atom.pred.id) << '\t'
                << names[atom.object];
        tsv << "\t+\n";
    }
    write_file(out / "model.tsv", tsv.str());
    if (model.inconsistent) {
        std::cerr << "[rrnlab] knowledge base is inconsistent:\n";
        for (const auto& v : model.violations) std::cerr << "  " << v << "\n";
    }
    std::cerr << "[rrnlab] materialized " << model.derived_order.size() << " facts to "
              << (out / "model.tsv") << "\n";
    write_run_json(out, "materialize",
                   {{"ontology", a.ontology},
                    {"facts", a.facts},
                    {"derived", model.derived_order.size()},
                    {"consistent", !model.inconsistent}});
    return 0;
}

struct TrainArgs {
    std::string data, out, resume;
    TrainConfig cfg;
};

int cmd_train(const TrainArgs& a) {
    const LoadedDataset dataset = load_dataset(a.data);
    const fs::path out = a.out;
    std::optional<Checkpoint> resume;
    if (!a.resume.empty()) resume = load_checkpoint(a.resume);
    const TrainResult result =
        train(dataset, a.cfg, out, resume ? &*resume : nullptr);
    write_run_json(out, "train",
                   {{"data", a.data},
                    {"seed", a.cfg.seed},
                    {"epochs", a.cfg.max_epochs},
                    {"patience", a.cfg.patience},
                    {"hyperparams", a.cfg.hp.to_json()},
                    {"resume", a.resume},
                    {"epochs_run", result.epochs_run},
                    {"best_eval_loss", result.best_eval_loss}});
    std::cerr << "[rrnlab] checkpoint written to " << result.checkpoint_path << "\n";
    return 0;
}

struct EvalArgs {
    std::string checkpoint, data, split = "test", out;
    std::uint64_t seed = 0;
    int jobs = 1;
};

int cmd_eval(const EvalArgs& a) {
    const Checkpoint ck = load_checkpoint(a.checkpoint);
    const LoadedDataset dataset = load_dataset(a.data, {a.split});
    const MetricsReport report = evaluate(ck, dataset, a.split, a.seed, a.jobs);
    const fs::path out = a.out.empty() ? default_out() : fs::path(a.out);
    write_file(out / "metrics.json", report.to_json().dump(2) + "\n");
    write_file(out / "metrics.md", report.to_markdown());
    write_run_json(out, "eval",
                   {{"checkpoint", a.checkpoint},
                    {"data", a.data},
                    {"split", a.split},
                    {"seed", a.seed},
                    {"jobs", a.jobs},
                    {"total_accuracy", report.total_accuracy}});
    std::cerr << "[rrnlab] metrics written to " << (out / "metrics.json") << "\n";
    return 0;
}

struct CorruptArgs {
    std::string mode, checkpoint, data, split = "test", out;
    std::uint64_t seed = 0;
};

int cmd_corrupt(const CorruptArgs& a) {
    const Checkpoint ck = load_checkpoint(a.checkpoint);
    const LoadedDataset dataset = load_dataset(a.data, {a.split});
    ExperimentReport report;
    if (a.mode == "missing")
        report = run_missing_fact_experiment(ck, dataset, a.split, a.seed);
    else if (a.mode == "conflict")
        report = run_conflict_experiment(ck, dataset, a.split, a.seed);
    else
        throw KbError("--mode must be missing|conflict");
    const fs::path out = a.out.empty() ? default_out() : fs::path(a.out);
    write_file(out / ("experiment_" + a.mode + ".json"),
               report.to_json().dump(2) + "\n");
    write_run_json(out, "corrupt",
                   {{"mode", a.mode},
                    {"checkpoint", a.checkpoint},
                    {"data", a.data},
                    {"split", a.split},
                    {"seed", a.seed},
                    {"rate", report.rate},
                    {"accuracy_delta_points", report.accuracy_delta_points}});
    std::cerr << "[rrnlab] " << a.mode << " experiment: rate " << report.rate
              << ", accuracy delta " << report.accuracy_delta_points << " points\n";
    return 0;
}

struct ExportArgs {
    std::string checkpoint, data, split = "test", out;
    int index = 0;
    std::uint64_t seed = 0;
};

int cmd_export(const ExportArgs& a) {
    const Checkpoint ck = load_checkpoint(a.checkpoint);
    const LoadedDataset dataset = load_dataset(a.data, {a.split});
    const auto& samples = dataset.splits.at(a.split);
    if (a.index < 0 || a.index >= static_cast<int>(samples.size()))
        throw KbError("sample index out of range");
    if (ck.vocab_fingerprint() != dataset.program.vocab().fingerprint())
        throw KbError("checkpoint vocabulary fingerprint does not match the dataset");
    const std::string tsv = export_embeddings(ck, samples[a.index], a.seed);
    const fs::path out = a.out.empty() ? default_out() : fs::path(a.out);
    write_file(out / "embeddings.tsv", tsv);
    write_run_json(out, "export-embeddings",
                   {{"checkpoint", a.checkpoint},
                    {"data", a.data},
                    {"split", a.split},
                    {"index", a.index},
                    {"seed", a.seed}});
    std::cerr << "[rrnlab] embeddings written to " << (out / "embeddings.tsv") << "\n";
    return 0;
}

void add_hyperparam_flags(CLI::App* cmd, Hyperparams& hp) {
    cmd->add_option("--dim", hp.embedding_dim, "embedding dimension");
    cmd->add_option("--hidden", hp.hidden_dim, "hidden width");
    cmd->add_option("--passes", hp.passes, "encode passes over the facts");
    cmd->add_option("--lr", hp.learning_rate, "learning rate");
    cmd->add_option("--neg-ratio", hp.negative_ratio, "negatives per positive");
    cmd->add_option("--init-scale", hp.init_scale, "embedding init stddev");
    cmd->add_option("--max-facts", hp.max_facts, "capacity bound");
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"rrnlab: ontology-reasoning workbench (symbolic oracle, dataset "
                 "generators, recursive reasoning network)"};
    app.require_subcommand(1);

    GenerateFamilyArgs gf;
    GenerateCountriesArgs gc;
    ReasonArgs re;
    MaterializeArgs ma;
    TrainArgs tr;
    EvalArgs ev;
    CorruptArgs co;
    ExportArgs ex;

    auto* generate = app.add_subcommand("generate", "generate benchmark datasets");
    generate->require_subcommand(1);
    auto* family = generate->add_subcommand("family", "family-tree samples");
    family->add_option("--samples,--train", gf.cfg.n_train, "training samples")
        ->default_val(500);
    family->add_option("--eval", gf.cfg.n_eval, "eval samples")->default_val(50);
    family->add_option("--test", gf.cfg.n_test, "test samples")->default_val(100);
    family->add_option("--max-people", gf.cfg.family.max_people)->default_val(26);
    family->add_option("--max-depth", gf.cfg.family.max_depth)->default_val(5);
    family->add_option("--max-branching", gf.cfg.family.max_branching)->default_val(5);
    family->add_option("--stop-probability", gf.cfg.family.stop_probability)
        ->default_val(0.02);
    family->add_option("--seed", gf.cfg.seed, "generation seed")->required();
    family->add_option("--out", gf.out, "output directory")->required();

    auto* countries = generate->add_subcommand("countries", "countries S1/S2/S3");
    countries->add_option("--version", gc.version, "s1|s2|s3")->required();
    countries->add_option("--world", gc.world_file, "world TSV file");
    countries->add_option("--synth-world", gc.synth_spec,
                          "synthesize a world, RxSxC (regions x subregions x countries)");
    countries->add_option("--train", gc.cfg.n_train, "training samples")
        ->default_val(100);
    countries->add_option("--test-countries", gc.cfg.n_test_countries)->default_val(20);
    countries->add_option("--seed", gc.cfg.seed, "generation seed")->required();
    countries->add_option("--out", gc.out, "output directory")->required();

    auto* reason = app.add_subcommand("reason", "decide a single entailment query");
    reason->add_option("--ontology", re.ontology)->required();
    reason->add_option("--facts", re.facts)->required();
    reason->add_option("--query", re.query)->required();
    reason->add_option("--semantics", re.semantics, "plain|cwa|lcwa");
    reason->add_option("--out", re.out, "run.json directory");

    auto* mat = app.add_subcommand("materialize", "compute and export the least model");
    mat->add_option("--ontology", ma.ontology)->required();
    mat->add_option("--facts", ma.facts)->required();
    mat->add_option("--out", ma.out, "output directory");

    auto* train_cmd = app.add_subcommand("train", "train an RRN on a dataset");
    train_cmd->add_option("--data", tr.data, "dataset directory")->required();
    train_cmd->add_option("--out", tr.out, "output directory")->required();
    train_cmd->add_option("--seed", tr.cfg.seed)->required();
    train_cmd->add_option("--epochs", tr.cfg.max_epochs)->default_val(60);
    train_cmd->add_option("--patience", tr.cfg.patience)->default_val(5);
    train_cmd->add_option("--full-universe-limit", tr.cfg.full_universe_limit)
        ->default_val(3000);
    train_cmd->add_option("--resume", tr.resume, "checkpoint to continue from");
    train_cmd->add_option("--jobs", tr.cfg.jobs)->default_val(1);
    train_cmd->add_flag("--quiet", tr.cfg.quiet, "suppress per-epoch logs");
    add_hyperparam_flags(train_cmd, tr.cfg.hp);

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a split");
    eval_cmd->add_option("--checkpoint", ev.checkpoint)->required();
    eval_cmd->add_option("--data", ev.data)->required();
    eval_cmd->add_option("--split", ev.split)->default_val("test");
    eval_cmd->add_option("--seed", ev.seed)->default_val(0);
    eval_cmd->add_option("--jobs", ev.jobs)->default_val(1);
    eval_cmd->add_option("--out", ev.out, "output directory");

    auto* corrupt = app.add_subcommand("corrupt", "robustness experiments");
    corrupt->add_option("--mode", co.mode, "missing|conflict")->required();
    corrupt->add_option("--checkpoint", co.checkpoint)->required();
    corrupt->add_option("--data", co.data)->required();
    corrupt->add_option("--split", co.split)->default_val("test");
    corrupt->add_option("--seed", co.seed)->default_val(0);
    corrupt->add_option("--out", co.out, "output directory");

    auto* export_cmd =
        app.add_subcommand("export-embeddings", "dump individual embeddings as TSV");
    export_cmd->add_option("--checkpoint", ex.checkpoint)->required();
    export_cmd->add_option("--data", ex.data)->required();
    export_cmd->add_option("--split", ex.split)->default_val("test");
    export_cmd->add_option("--index", ex.index)->default_val(0);
    export_cmd->add_option("--seed", ex.seed)->default_val(0);
    export_cmd->add_option("--out", ex.out, "output directory");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (family->parsed()) return cmd_generate_family(gf);
        if (countries->parsed()) return cmd_generate_countries(gc);
        if (reason->parsed()) return cmd_reason(re);
        if (mat->parsed()) return cmd_materialize(ma);
        if (train_cmd->parsed()) return cmd_train(tr);
        if (eval_cmd->parsed()) return cmd_eval(ev);
        if (corrupt->parsed()) return cmd_corrupt(co);
        if (export_cmd->parsed()) return cmd_export(ex);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace rrnlab
