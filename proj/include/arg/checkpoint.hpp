#pragma once

#include <string>

#include "arg/config.hpp"
#include "arg/model.hpp"

namespace arg {

struct CheckpointError : std::runtime_error {
  explicit CheckpointError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Versioned binary container: magic, format version, resolved config
/// snapshot, named weight tensors with shapes, trailing CRC32 checksum.
/// Weights round-trip bit-exactly.
void save_checkpoint(const ModelParams& m, const TrainConfig& cfg,
                     const std::string& path);

std::pair<ModelParams, TrainConfig> load_checkpoint(const std::string& path);

}  // namespace arg
