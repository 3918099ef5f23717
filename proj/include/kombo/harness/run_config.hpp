// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "kombo/model/config.hpp"
#include "kombo/nn/optimizer.hpp"
#include "kombo/objectives/masking.hpp"

namespace kombo::harness {

struct RunPaths {
  std::string corpus;
  std::string vocab;
  std::string checkpoint_dir;  // empty: no files are written
  std::string loss_log;        // empty: <checkpoint_dir>/loss.csv
  friend bool operator==(const RunPaths&, const RunPaths&) = default;
};

/// Everything a pretraining run depends on besides the data files themselves.
struct RunConfig {
  model::ModelConfig model;
  objectives::ObjectiveConfig objective;
  nn::AdamWConfig optimizer;
  std::size_t batch_size = 16;
  std::size_t total_steps = 1000;
  std::size_t seq_len = 192;
  std::uint64_t seed = 0;
  std::size_t checkpoint_interval = 0;  // 0: only the final checkpoint
  std::size_t shuffle_buffer = 1024;
  RunPaths paths;

  /// seq_len must be a multiple of tokens_per_char and fit model.max_len.
  void validate() const;
  nlohmann::json to_json() const;
  /// Sorted keys, two-space indent, trailing newline. Byte-stable for equal configs.
  std::string canonical() const;
  static RunConfig from_json(const nlohmann::json& j);
  /// Relative paths in the file are resolved against the file's directory.
  static RunConfig load(const std::filesystem::path& path);
};

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace kombo::harness
