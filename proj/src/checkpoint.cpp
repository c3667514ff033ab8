#include "rrnlab/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace rrnlab {

namespace {

constexpr char kMagic[8] = {'R', 'R', 'N', 'C', 'K', 'P', 'T', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint blob writer assumes a little-endian host");

void append_tensors(std::string& blob, const Parameters& p) {
    for (const auto& view : tensor_views(p))
        for (std::size_t i = 0; i < view.size; ++i) {
            const float f = static_cast<float>(view.data[i]);
            blob.append(reinterpret_cast<const char*>(&f), sizeof(float));
        }
}

void read_tensors(const char*& cursor, const char* end, Parameters& p) {
    for (auto& view : tensor_views(p)) {
        if (cursor + view.size * sizeof(float) > end)
            throw KbError("checkpoint blob truncated");
        for (std::size_t i = 0; i < view.size; ++i) {
            float f;
            std::memcpy(&f, cursor, sizeof(float));
            cursor += sizeof(float);
            view.data[i] = static_cast<double>(f);
        }
    }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
    nlohmann::json manifest;
    manifest["vocabulary"] = {{"classes", ck.params.vocab->classes()},
                              {"relations", ck.params.vocab->relations()}};
    manifest["fingerprint"] = ck.vocab_fingerprint();
    manifest["hyperparams"] = ck.hp.to_json();
    manifest["epoch"] = ck.epoch;
    manifest["has_adam"] = ck.adam.has_value();
    if (ck.adam) manifest["adam_step"] = ck.adam->step;
    manifest["extra"] = ck.extra;
    nlohmann::json shapes = nlohmann::json::array();
    for (const auto& view : tensor_views(ck.params))
        shapes.push_back({{"name", view.name}, {"size", view.size}});
    manifest["tensors"] = shapes;

    std::string blob;
    append_tensors(blob, ck.params);
    if (ck.adam) {
        append_tensors(blob, ck.adam->m);
        append_tensors(blob, ck.adam->v);
    }

    const std::string json = manifest.dump();
    std::string out;
    out.append(kMagic, sizeof(kMagic));
    const std::uint64_t len = json.size();
    out.append(reinterpret_cast<const char*>(&len), sizeof(len));
    out += json;
    out += blob;

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw KbError("cannot write checkpoint: " + path.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw KbError("cannot open checkpoint: " + path.string());
    std::string data((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
    if (data.size() < sizeof(kMagic) + sizeof(std::uint64_t) ||
        std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0)
        throw KbError("not a checkpoint file: " + path.string());
    std::uint64_t len;
    std::memcpy(&len, data.data() + sizeof(kMagic), sizeof(len));
    const std::size_t json_start = sizeof(kMagic) + sizeof(len);
    if (json_start + len > data.size()) throw KbError("checkpoint manifest truncated");
    const nlohmann::json manifest =
        nlohmann::json::parse(data.substr(json_start, len));

    auto vocab = std::make_shared<Vocabulary>();
    for (const auto& c : manifest.at("vocabulary").at("classes"))
        vocab->add_class(c.get<std::string>());
    for (const auto& r : manifest.at("vocabulary").at("relations"))
        vocab->add_relation(r.get<std::string>());

    Checkpoint ck;
    ck.hp = Hyperparams::from_json(manifest.at("hyperparams"));
    ck.params = Parameters(vocab, ck.hp);
    ck.epoch = manifest.value("epoch", 0);
    ck.extra = manifest.value("extra", nlohmann::json::object());

    if (manifest.at("fingerprint").get<std::uint64_t>() != vocab->fingerprint())
        throw KbError("checkpoint vocabulary fingerprint mismatch");

    const char* cursor = data.data() + json_start + len;
    const char* end = data.data() + data.size();
    read_tensors(cursor, end, ck.params);
    if (manifest.value("has_adam", false)) {
        AdamState adam(vocab, ck.hp);
        adam.step = manifest.value("adam_step", 0L);
        read_tensors(cursor, end, adam.m);
        read_tensors(cursor, end, adam.v);
        ck.adam = std::move(adam);
    }
    return ck;
}

}  // namespace rrnlab
