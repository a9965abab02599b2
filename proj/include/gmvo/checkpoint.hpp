#pragma once

#include <filesystem>

#include "gmvo/training.hpp"

namespace gmvo {

struct Checkpoint {
  ModelParams params;
  TrainConfig config;
};

/// File layout: one-line JSON header (model kind, hops, dims, lambda, seed,
/// the rest of the training config, byte offset and checksum of the binary
/// section), a newline, then every parameter as IEEE-754 float32
/// little-endian in declaration order.
void save_checkpoint(const ModelParams& params, const TrainConfig& config,
                     const std::filesystem::path& path);

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace gmvo
