#pragma once

#include <filesystem>
#include <memory>
#include <optional>

#include "lidlab/scorenet/train.hpp"

namespace lidlab::scorenet {

/// Checkpoint layout: a magic line, the manifest length, a JSON manifest
/// (architecture, dims, schedule id, seed, step count) and the raw
/// little-endian float64 parameter array. Loading reproduces the score
/// bit-exactly.
void save_checkpoint(const TrainedScoreNet& model, const std::filesystem::path& path);

/// Throws on a corrupt manifest or truncated parameters; when
/// expected_ambient_dim is given, a mismatch is an error naming both dims.
std::shared_ptr<TrainedScoreNet> load_checkpoint(
    const std::filesystem::path& path,
    std::optional<int> expected_ambient_dim = std::nullopt);

} // namespace lidlab::scorenet
