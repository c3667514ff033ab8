#include "rrnlab/io.hpp"

#include <fstream>
#include <sstream>

namespace rrnlab {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw KbError("cannot open file: " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw KbError("cannot write file: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string sample_to_tsv(const SampleKB& sample) {
    std::ostringstream out;
    out << "# individuals:";
    for (const auto& name : sample.individuals()) out << ' ' << name;
    out << '\n';
    std::vector<Literal> lits;
    lits.reserve(sample.facts().size());
    for (const auto& f : sample.facts()) lits.push_back(sample.to_literal(f));
    out << serialize_facts(lits);
    return out.str();
}

SampleKB sample_from_tsv(VocabularyPtr vocab, std::string_view text,
                         std::string provenance, bool allow_contradiction) {
    SampleKB sample(vocab, std::move(provenance));
    // roster header keeps individuals and their order explicit
    if (text.starts_with("# individuals:")) {
        const auto eol = text.find('\n');
        std::istringstream header(std::string(text.substr(14, eol - 14)));
        std::string name;
        while (header >> name) sample.add_individual(name);
        text = text.substr(eol == std::string_view::npos ? text.size() : eol + 1);
    }
    const auto lits = parse_facts(text, vocab.get());
    for (const auto& lit : lits)
        for (const auto& arg : lit.args) sample.add_individual(arg);
    for (const auto& lit : lits) sample.add_literal(lit, allow_contradiction);
    return sample;
}

std::string labels_to_tsv(const SampleKB& sample,
                          std::span<const LabeledQuery> labels) {
    std::ostringstream out;
    for (const auto& q : labels) {
        const auto& vocab = sample.vocab();
        if (q.atom.pred.kind == PredKind::Class)
            out << sample.individual_name(q.atom.subject) << '\t'
                << Vocabulary::kMemberToken << '\t' << vocab.class_name(q.atom.pred.id);
        else
            out << sample.individual_name(q.atom.subject) << '\t'
                << vocab.relation_name(q.atom.pred.id) << '\t'
                << sample.individual_name(q.atom.object);
        out << '\t' << (q.label ? "true" : "false") << '\t'
            << (q.origin == QueryOrigin::Specified ? "specified" : "inferable") << '\n';
    }
    return out.str();
}

std::vector<LabeledQuery> labels_from_tsv(const SampleKB& sample,
                                          std::string_view text) {
    std::vector<LabeledQuery> out;
    int lineno = 0;
    std::size_t start = 0;
    const auto& vocab = sample.vocab();
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::size_t fstart = 0;
        for (std::size_t i = 0; i <= line.size(); ++i)
            if (i == line.size() || line[i] == '\t') {
                fields.emplace_back(line.substr(fstart, i - fstart));
                fstart = i + 1;
            }
        if (fields.size() != 5)
            throw ParseError(lineno, 1, "labels line needs 5 fields");
        LabeledQuery q;
        if (fields[1] == Vocabulary::kMemberToken) {
            const auto cid = vocab.class_id(fields[2]);
            if (!cid) throw ParseError(lineno, 1, "unknown class: " + fields[2]);
            q.atom = GroundAtom::cls(*cid, sample.individual_id(fields[0]));
        } else {
            const auto rid = vocab.relation_id(fields[1]);
            if (!rid) throw ParseError(lineno, 1, "unknown relation: " + fields[1]);
            q.atom = GroundAtom::rel(*rid, sample.individual_id(fields[0]),
                                     sample.individual_id(fields[2]));
        }
        if (fields[3] == "true")
            q.label = true;
        else if (fields[3] == "false")
            q.label = false;
        else
            throw ParseError(lineno, 1, "label must be true|false");
        if (fields[4] == "specified")
            q.origin = QueryOrigin::Specified;
        else if (fields[4] == "inferable")
            q.origin = QueryOrigin::Inferable;
        else
            throw ParseError(lineno, 1, "origin must be specified|inferable");
        out.push_back(q);
    }
    return out;
}

nlohmann::json DatasetManifest::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["version"] = version;
    j["ontology"] = ontology_file;
    j["seed"] = seed;
    j["splits"] = splits;
    j["params"] = params;
    return j;
}

DatasetManifest DatasetManifest::from_json(const nlohmann::json& j) {
    DatasetManifest m;
    m.name = j.at("name").get<std::string>();
    m.version = j.value("version", "");
    m.ontology_file = j.at("ontology").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.splits = j.at("splits").get<std::map<std::string, std::vector<std::string>>>();
    m.params = j.value("params", nlohmann::json::object());
    return m;
}

void write_manifest(const fs::path& dir, const DatasetManifest& m) {
    write_file(dir / "manifest.json", m.to_json().dump(2) + "\n");
}

DatasetManifest read_manifest(const fs::path& dir) {
    return DatasetManifest::from_json(
        nlohmann::json::parse(read_file(dir / "manifest.json")));
}

LoadedDataset load_dataset(const fs::path& dir, const std::vector<std::string>& splits) {
    DatasetManifest manifest = read_manifest(dir);
    Program program = parse_program(read_file(dir / manifest.ontology_file));
    LoadedDataset out{std::move(manifest), std::move(program), {}};
    const auto wanted = [&](const std::string& split) {
        if (splits.empty()) return true;
        return std::find(splits.begin(), splits.end(), split) != splits.end();
    };
    for (const auto& [split, files] : out.manifest.splits) {
        if (!wanted(split)) continue;
        auto& dest = out.splits[split];
        for (const auto& file : files) {
            LoadedSample s{file,
                           sample_from_tsv(out.program.vocab_ptr(),
                                           read_file(dir / file), file),
                           {}};
            const fs::path label_path =
                dir / "labels" / fs::path(file);
            s.labels = labels_from_tsv(s.facts, read_file(label_path));
            dest.push_back(std::move(s));
        }
    }
    return out;
}

}  // namespace rrnlab
