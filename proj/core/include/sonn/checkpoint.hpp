#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sonn/layers.hpp"
#include "sonn/tensor.hpp"

namespace sonn {

struct CheckpointMeta {
    NetworkConfig config;
    int epoch = 0;
    double validation_psnr = 0.0;
};

/// Named-tensor container with bit-exact binary serialization.
///
/// File layout (little-endian): magic "SONN", u32 version = 1, u32 entry
/// count; per entry u32 name length, name bytes (UTF-8), u32 rank, u64
/// extents, IEEE-754 binary64 payload; then u32 JSON length and the JSON
/// metadata bytes (config, epoch, validation_psnr).
struct Checkpoint {
    std::vector<std::pair<std::string, Tensor>> entries;
    CheckpointMeta meta;
};

/// Packs a network into entries named layer<i>/weight, layer<i>/bias and
/// layer<i>/shifts (shape [in, 2], columns alpha then beta).
Checkpoint make_checkpoint(const NetworkConfig& config, const NetworkState& state, int epoch,
                           double validation_psnr);

NetworkState state_from_checkpoint(const Checkpoint& checkpoint);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sonn
