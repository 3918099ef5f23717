// SPDX-License-Identifier: Apache-2.0
#include "kombo/harness/run_config.hpp"

#include <fstream>

#include "kombo/error.hpp"

namespace kombo::harness {
namespace {

constexpr std::size_t tokenizer_placeholder_vocab = 1;

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::ConfigError, msg); }

template <typename F>
void for_known_keys(const nlohmann::json& j, const std::string& where, F&& handle) {
  if (!j.is_object()) config_error(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!handle(key, value)) config_error("unknown key '" + key + "' in " + where);
  }
}

nlohmann::json optimizer_json(const nn::AdamWConfig& o) {
  return {{"lr", o.lr},
          {"betas", {o.beta1, o.beta2}},
          {"eps", o.eps},
          {"weight_decay", o.weight_decay},
          {"warmup_steps", o.warmup_steps}};
}

nn::AdamWConfig optimizer_from(const nlohmann::json& j) {
  nn::AdamWConfig o;
  for_known_keys(j, "optimizer", [&](const std::string& key, const nlohmann::json& v) {
    if (key == "lr") o.lr = v.get<double>();
    else if (key == "eps") o.eps = v.get<double>();
    else if (key == "weight_decay") o.weight_decay = v.get<double>();
    else if (key == "warmup_steps") o.warmup_steps = v.get<std::size_t>();
    else if (key == "betas") {
      if (!v.is_array() || v.size() != 2) config_error("betas is [beta1, beta2]");
      o.beta1 = v[0].get<double>();
      o.beta2 = v[1].get<double>();
    } else return false;
    return true;
  });
  return o;
}

void resolve(std::string& path, const std::filesystem::path& base) {
  if (!path.empty() && std::filesystem::path(path).is_relative()) path = (base / path).lexically_normal().string();
}

}  // namespace

void RunConfig::validate() const {
  // vocab_size 0 is filled in from the vocabulary when the run starts.
  auto m = model;
  if (m.vocab_size == 0) m.vocab_size = tokenizer_placeholder_vocab;
  m.validate();
  objective.validate();
  const auto tpc = static_cast<std::size_t>(model.scheme.tokens_per_char);
  if (seq_len == 0 || seq_len % tpc != 0) {
    config_error("seq_len " + std::to_string(seq_len) + " is not a positive multiple of " + std::to_string(tpc));
  }
  if (seq_len > model.max_len) config_error("seq_len exceeds model.max_len");
  if (batch_size == 0) config_error("batch_size must be positive");
  if (shuffle_buffer == 0) config_error("shuffle_buffer must be positive");
  if (optimizer.lr < 0 || optimizer.weight_decay < 0) config_error("optimizer lr and weight_decay must be >= 0");
}

nlohmann::json RunConfig::to_json() const {
  return {{"model", model.to_json()},
          {"objective", objective.to_json()},
          {"optimizer", optimizer_json(optimizer)},
          {"batch_size", batch_size},
          {"total_steps", total_steps},
          {"seq_len", seq_len},
          {"seed", seed},
          {"checkpoint_interval", checkpoint_interval},
          {"shuffle_buffer", shuffle_buffer},
          {"paths",
           {{"corpus", paths.corpus},
            {"vocab", paths.vocab},
            {"checkpoint_dir", paths.checkpoint_dir},
            {"loss_log", paths.loss_log}}}};
}

std::string RunConfig::canonical() const { return to_json().dump(2) + "\n"; }

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    for_known_keys(j, "run config", [&](const std::string& key, const nlohmann::json& v) {
      if (key == "model") c.model = model::ModelConfig::from_json(v);
      else if (key == "objective") c.objective = objectives::ObjectiveConfig::from_json(v);
      else if (key == "optimizer") c.optimizer = optimizer_from(v);
      else if (key == "batch_size") c.batch_size = v.get<std::size_t>();
      else if (key == "total_steps") c.total_steps = v.get<std::size_t>();
      else if (key == "seq_len") c.seq_len = v.get<std::size_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "checkpoint_interval") c.checkpoint_interval = v.get<std::size_t>();
      else if (key == "shuffle_buffer") c.shuffle_buffer = v.get<std::size_t>();
      else if (key == "paths") {
        for_known_keys(v, "paths", [&](const std::string& k, const nlohmann::json& p) {
          if (k == "corpus") c.paths.corpus = p.get<std::string>();
          else if (k == "vocab") c.paths.vocab = p.get<std::string>();
          else if (k == "checkpoint_dir") c.paths.checkpoint_dir = p.get<std::string>();
          else if (k == "loss_log") c.paths.loss_log = p.get<std::string>();
          else return false;
          return true;
        });
      } else return false;
      return true;
    });
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("bad value in run config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
  RunConfig c = from_json(j);
  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  resolve(c.paths.corpus, base);
  resolve(c.paths.vocab, base);
  resolve(c.paths.checkpoint_dir, base);
  resolve(c.paths.loss_log, base);
  return c;
}

bool operator==(const RunConfig& a, const RunConfig& b) { return a.canonical() == b.canonical(); }

}  // namespace kombo::harness
