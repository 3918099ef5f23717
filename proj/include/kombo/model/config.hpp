// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kombo/hangul/unit_scheme.hpp"

namespace kombo::model {

struct KernelShape {
  std::size_t height = 2;
  std::size_t width = 1;
  friend bool operator==(const KernelShape&, const KernelShape&) = default;
};

struct MergeSpec {
  std::vector<KernelShape> kernels{{2, 1}};
  friend bool operator==(const MergeSpec&, const MergeSpec&) = default;
};

enum class RestoreCell { Linear, Gru };

struct RestorationSpec {
  RestoreCell cell = RestoreCell::Gru;
  bool hierarchical = true;  // HR
  bool residual = true;      // RC
  friend bool operator==(const RestorationSpec&, const RestorationSpec&) = default;
};

enum class Downsample { None, AttentionPool, LinearPool };

struct Ablations {
  bool no_contextualization = false;
  bool no_merge = false;
  bool no_jongsung_addition = false;
  Downsample alt_downsample = Downsample::None;
  friend bool operator==(const Ablations&, const Ablations&) = default;
};

struct ModelConfig {
  std::size_t d_model = 128;
  std::size_t layers = 4;
  std::size_t local_layers = 2;
  std::size_t heads = 4;
  hangul::UnitScheme scheme = hangul::UnitScheme::of(hangul::SchemeKind::Jamo);
  MergeSpec merge;
  RestorationSpec restore;
  Ablations ablations;
  std::size_t max_len = 192;
  std::size_t vocab_size = 0;
  bool bidirectional_gru = false;  // contextualization GRU; directions are summed
  std::size_t nsp_classes = 2;

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;
  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys throw ConfigError.
  static ModelConfig from_json(const nlohmann::json& j);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

std::string to_string(RestoreCell cell);
std::string to_string(Downsample method);
RestoreCell parse_restore_cell(const std::string& name);
Downsample parse_downsample(const std::string& name);

/// Every parameter tensor a config implies, in construction order.
struct ParamShape {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t size() const;
};
std::vector<ParamShape> parameter_shapes(const ModelConfig& cfg);

struct ParamReport {
  std::size_t total = 0;
  std::size_t token_embedding = 0;  // vocab_size x d_model
  std::size_t positional_embedding = 0;
  std::size_t heads = 0;
  std::vector<ParamShape> tensors;
};
ParamReport param_count(const ModelConfig& cfg);

/// Row count of one embedding table as a percentage of another of equal width.
double embedding_share_percent(std::size_t rows, std::size_t reference_rows);

}  // namespace kombo::model
