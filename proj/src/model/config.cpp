// SPDX-License-Identifier: Apache-2.0
#include "kombo/model/config.hpp"

#include <set>

#include "kombo/error.hpp"

namespace kombo::model {
namespace {

using nlohmann::json;

void config_error(const std::string& msg) { throw Error(ErrorKind::ConfigError, msg); }

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) config_error(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) config_error("unknown key '" + key + "' in " + where);
  }
}

template <typename V>
void read(const json& j, const char* key, V& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<V>();
  } catch (const json::exception& e) {
    config_error(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

std::string to_string(RestoreCell cell) { return cell == RestoreCell::Gru ? "gru" : "linear"; }

std::string to_string(Downsample method) {
  switch (method) {
    case Downsample::AttentionPool:
      return "attention_pool";
    case Downsample::LinearPool:
      return "linear_pool";
    case Downsample::None:
      break;
  }
  return "none";
}

RestoreCell parse_restore_cell(const std::string& name) {
  if (name == "gru") return RestoreCell::Gru;
  if (name == "linear") return RestoreCell::Linear;
  config_error("unknown restoration cell '" + name + "'");
  return RestoreCell::Gru;
}

Downsample parse_downsample(const std::string& name) {
  if (name == "none") return Downsample::None;
  if (name == "attention_pool") return Downsample::AttentionPool;
  if (name == "linear_pool") return Downsample::LinearPool;
  config_error("unknown downsampler '" + name + "'");
  return Downsample::None;
}

void ModelConfig::validate() const {
  if (d_model == 0) config_error("d_model must be positive");
  if (heads == 0 || d_model % heads != 0) {
    config_error("d_model " + std::to_string(d_model) + " is not divisible by " + std::to_string(heads) + " heads");
  }
  const auto tpc = static_cast<std::size_t>(scheme.tokens_per_char);
  if (max_len == 0 || max_len % tpc != 0) {
    config_error("max_len " + std::to_string(max_len) + " is not a positive multiple of " + std::to_string(tpc));
  }
  if (vocab_size == 0) config_error("vocab_size must be set");
  if (nsp_classes < 2) config_error("nsp_classes must be at least 2");
  const bool merging = !ablations.no_merge && ablations.alt_downsample == Downsample::None;
  if (merging && !ablations.no_jongsung_addition && merge.kernels.empty()) config_error("merge needs a kernel");
  for (const auto& k : merge.kernels) {
    if (k.height != 2) config_error("merge kernels must have height 2");
    if (k.width == 0) config_error("merge kernel width must be positive");
  }
  if (ablations.no_merge && ablations.alt_downsample != Downsample::None) {
    config_error("no_merge and an alternative downsampler are mutually exclusive");
  }
  if (ablations.alt_downsample != Downsample::None && restore.hierarchical) {
    config_error("hierarchical restoration needs the merge intermediates; alternative downsamplers do not produce them");
  }
}

nlohmann::json ModelConfig::to_json() const {
  json kernels = json::array();
  for (const auto& k : merge.kernels) kernels.push_back({k.height, k.width});
  return json{{"d_model", d_model},
              {"layers", layers},
              {"local_layers", local_layers},
              {"heads", heads},
              {"scheme", scheme.name()},
              {"max_len", max_len},
              {"vocab_size", vocab_size},
              {"bidirectional_gru", bidirectional_gru},
              {"nsp_classes", nsp_classes},
              {"merge", {{"kernels", kernels}}},
              {"restore",
               {{"cell", to_string(restore.cell)},
                {"hierarchical", restore.hierarchical},
                {"residual", restore.residual}}},
              {"ablations",
               {{"no_contextualization", ablations.no_contextualization},
                {"no_merge", ablations.no_merge},
                {"no_jongsung_addition", ablations.no_jongsung_addition},
                {"alt_downsample", to_string(ablations.alt_downsample)}}}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  reject_unknown(j,
                 {"d_model", "layers", "local_layers", "heads", "scheme", "max_len", "vocab_size",
                  "bidirectional_gru", "nsp_classes", "merge", "restore", "ablations"},
                 "model");
  ModelConfig c;
  read(j, "d_model", c.d_model);
  read(j, "layers", c.layers);
  read(j, "local_layers", c.local_layers);
  read(j, "heads", c.heads);
  read(j, "max_len", c.max_len);
  read(j, "vocab_size", c.vocab_size);
  read(j, "bidirectional_gru", c.bidirectional_gru);
  read(j, "nsp_classes", c.nsp_classes);
  if (j.contains("scheme")) c.scheme = hangul::UnitScheme::parse(j.at("scheme").get<std::string>());
  if (j.contains("merge")) {
    const auto& m = j.at("merge");
    reject_unknown(m, {"kernels"}, "merge");
    if (m.contains("kernels")) {
      c.merge.kernels.clear();
      for (const auto& k : m.at("kernels")) {
        if (!k.is_array() || k.size() != 2) config_error("kernel entries are [height, width] pairs");
        c.merge.kernels.push_back({k[0].get<std::size_t>(), k[1].get<std::size_t>()});
      }
    }
  }
  if (j.contains("restore")) {
    const auto& r = j.at("restore");
    reject_unknown(r, {"cell", "hierarchical", "residual"}, "restore");
    if (r.contains("cell")) c.restore.cell = parse_restore_cell(r.at("cell").get<std::string>());
    read(r, "hierarchical", c.restore.hierarchical);
    read(r, "residual", c.restore.residual);
  }
  if (j.contains("ablations")) {
    const auto& a = j.at("ablations");
    reject_unknown(a, {"no_contextualization", "no_merge", "no_jongsung_addition", "alt_downsample"}, "ablations");
    read(a, "no_contextualization", c.ablations.no_contextualization);
    read(a, "no_merge", c.ablations.no_merge);
    read(a, "no_jongsung_addition", c.ablations.no_jongsung_addition);
    if (a.contains("alt_downsample")) c.ablations.alt_downsample = parse_downsample(a.at("alt_downsample").get<std::string>());
  }
  return c;
}

std::size_t ParamShape::size() const {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

namespace {

void linear(std::vector<ParamShape>& out, const std::string& name, std::size_t in, std::size_t o) {
  out.push_back({name + ".weight", {in, o}});
  out.push_back({name + ".bias", {o}});
}

void layer_norm(std::vector<ParamShape>& out, const std::string& name, std::size_t d) {
  out.push_back({name + ".gamma", {d}});
  out.push_back({name + ".beta", {d}});
}

void block(std::vector<ParamShape>& out, const std::string& name, std::size_t d) {
  layer_norm(out, name + ".ln_attn", d);
  for (const char* p : {".query", ".key", ".value", ".out"}) linear(out, name + p, d, d);
  layer_norm(out, name + ".ln_ffn", d);
  linear(out, name + ".ffn_in", d, 4 * d);
  linear(out, name + ".ffn_out", 4 * d, d);
}

void gru(std::vector<ParamShape>& out, const std::string& name, std::size_t d) {
  out.push_back({name + ".w_ih", {d, 3 * d}});
  out.push_back({name + ".w_hh", {d, 3 * d}});
  out.push_back({name + ".b_ih", {3 * d}});
  out.push_back({name + ".b_hh", {3 * d}});
}

void cell(std::vector<ParamShape>& out, const std::string& name, RestoreCell kind, std::size_t d) {
  if (kind == RestoreCell::Gru) gru(out, name, d);
  else linear(out, name, d, d);
}

}  // namespace

std::vector<ParamShape> parameter_shapes(const ModelConfig& cfg) {
  const std::size_t d = cfg.d_model;
  const auto tpc = static_cast<std::size_t>(cfg.scheme.tokens_per_char);
  std::vector<ParamShape> out;
  out.push_back({"embed.token", {cfg.vocab_size, d}});
  out.push_back({"embed.position", {cfg.max_len, d}});
  if (!cfg.ablations.no_contextualization) {
    for (std::size_t i = 0; i < cfg.local_layers; ++i) block(out, "context.block" + std::to_string(i), d);
    gru(out, "context.gru", d);
    if (cfg.bidirectional_gru) gru(out, "context.gru_reverse", d);
  }
  const auto& ab = cfg.ablations;
  if (!ab.no_merge) {
    if (ab.alt_downsample == Downsample::AttentionPool) {
      out.push_back({"pool.query", {d}});
    } else if (ab.alt_downsample == Downsample::LinearPool) {
      linear(out, "pool.linear", tpc * d, d);
    } else if (!ab.no_jongsung_addition) {
      for (std::size_t k = 0; k < cfg.merge.kernels.size(); ++k) {
        out.push_back({"merge.kernel" + std::to_string(k), {2 * cfg.merge.kernels[k].width, d}});
        out.push_back({"merge.bias" + std::to_string(k), {d}});
      }
    }
  }
  for (std::size_t i = 0; i < cfg.layers; ++i) block(out, "stack.block" + std::to_string(i), d);
  if (cfg.layers > 0) layer_norm(out, "stack.ln_final", d);
  if (!ab.no_merge) {
    if (cfg.restore.hierarchical) {
      cell(out, "restore.stage1", cfg.restore.cell, d);
      cell(out, "restore.stage2", cfg.restore.cell, d);
    } else {
      cell(out, "restore.cell", cfg.restore.cell, d);
    }
  }
  layer_norm(out, "head.ln", d);
  linear(out, "head.mlm", d, cfg.vocab_size);
  linear(out, "head.nsp", d, cfg.nsp_classes);
  return out;
}

ParamReport param_count(const ModelConfig& cfg) {
  ParamReport r;
  r.tensors = parameter_shapes(cfg);
  for (const auto& t : r.tensors) {
    r.total += t.size();
    if (t.name == "embed.token") r.token_embedding = t.size();
    if (t.name == "embed.position") r.positional_embedding = t.size();
    if (t.name.rfind("head.", 0) == 0) r.heads += t.size();
  }
  return r;
}

double embedding_share_percent(std::size_t rows, std::size_t reference_rows) {
  if (reference_rows == 0) config_error("reference table has no rows");
  return 100.0 * static_cast<double>(rows) / static_cast<double>(reference_rows);
}

}  // namespace kombo::model
