#pragma once

#include <filesystem>
#include <optional>

#include "rrnlab/rrn.hpp"

namespace rrnlab {

/// Model snapshot: vocabulary, hyperparameters, weights, and optionally the
/// optimizer state needed to continue training.
struct Checkpoint {
    Hyperparams hp;
    Parameters params;
    std::optional<AdamState> adam;
    int epoch = 0;
    nlohmann::json extra;  // dataset name, config echo, best metric, ...

    std::uint64_t vocab_fingerprint() const { return params.vocab->fingerprint(); }
};

/// Single-file format: magic, JSON manifest (vocabulary, hyperparameters,
/// tensor shapes), then all tensors as little-endian IEEE-754 single
/// precision in manifest order.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace rrnlab
