// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "kombo/model/model.hpp"
#include "kombo/tokenizer/vocab.hpp"

namespace kombo::harness {

struct CheckpointMeta {
  model::ModelConfig model;
  std::string run_config;  // canonical RunConfig text; empty when there was none
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  std::string vocab;       // serialized vocabulary
};

/// Parsed checkpoint. Tensors keep file order, which is the model's
/// parameter order at save time.
struct Checkpoint {
  CheckpointMeta meta;
  std::vector<std::pair<std::string, nn::Tensor<float>>> tensors;
};

/// Layout: the line `kombo-ckpt v1\n`, a little-endian u64 header length, a
/// JSON header (meta, dtype and the tensor table), then raw little-endian
/// float32 data for each tensor in table order. Writes to a temporary file
/// and renames it into place.
void save_checkpoint(const std::filesystem::path& path, const model::KomboModel<float>& m, const CheckpointMeta& meta);

/// Throws CheckpointError on a bad magic line, header or truncated data.
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Copies tensors into `m`. The tensor set must match the model's parameters
/// exactly; the error names the first tensor that is missing, unexpected or
/// of the wrong shape.
void restore_parameters(const Checkpoint& ckpt, model::KomboModel<float>& m);

/// Model built from the header config with the stored parameters.
std::unique_ptr<model::KomboModel<float>> load_model(const Checkpoint& ckpt);

}  // namespace kombo::harness
