// SPDX-License-Identifier: Apache-2.0
#include "kombo/harness/pretrain.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "kombo/error.hpp"
#include "kombo/harness/checkpoint.hpp"
#include "kombo/harness/data.hpp"
#include "kombo/nn/ops.hpp"
#include "kombo/nn/optimizer.hpp"
#include "kombo/tokenizer/tokenizer.hpp"

namespace kombo::harness {
namespace {

std::filesystem::path loss_log_path(const RunConfig& cfg) {
  if (!cfg.paths.loss_log.empty()) return cfg.paths.loss_log;
  return std::filesystem::path(cfg.paths.checkpoint_dir) / "loss.csv";
}

}  // namespace

std::string loss_log_line(const LossRecord& r) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,%.9g\n", r.step, r.mlm_loss, r.nsp_loss, r.lr);
  return buf;
}

std::string loss_log_csv(const std::vector<LossRecord>& log) {
  std::string out = "step,mlm_loss,nsp_loss,lr\n";
  for (const auto& r : log) out += loss_log_line(r);
  return out;
}

PretrainResult pretrain(const RunConfig& run, const objectives::Corpus& corpus, const tokenizer::Vocab& vocab,
                        const StepCallback& on_step) {
  RunConfig cfg = run;
  if (cfg.model.vocab_size == 0) cfg.model.vocab_size = vocab.size();
  if (cfg.model.vocab_size != vocab.size()) {
    throw Error(ErrorKind::ConfigError, "model.vocab_size " + std::to_string(cfg.model.vocab_size) +
                                            " does not match the vocabulary (" + std::to_string(vocab.size()) + ")");
  }
  if (cfg.model.scheme.kind != vocab.scheme().kind) {
    throw Error(ErrorKind::ConfigError, "model scheme differs from the vocabulary scheme");
  }
  cfg.validate();
  if (corpus.sentence_count() == 0) throw Error(ErrorKind::NoData, "corpus has no sentences");

  const tokenizer::Tokenizer tok(vocab);
  BatchStream stream(corpus, tok, cfg.objective, cfg.seq_len, cfg.batch_size, cfg.shuffle_buffer, cfg.seed);
  PretrainResult result;
  result.positive_only = stream.positive_only();
  result.model = std::make_unique<model::KomboModel<float>>(cfg.model, cfg.seed);
  auto& m = *result.model;
  nn::AdamW<float> opt(cfg.optimizer);

  const bool write = !cfg.paths.checkpoint_dir.empty();
  const std::filesystem::path dir = cfg.paths.checkpoint_dir;
  CheckpointMeta meta{cfg.model, cfg.canonical(), cfg.seed, 0, vocab.serialize()};
  std::ofstream log_file;
  if (write) {
    std::filesystem::create_directories(dir);
    const auto log_path = loss_log_path(cfg);
    if (log_path.has_parent_path()) std::filesystem::create_directories(log_path.parent_path());
    log_file.open(log_path, std::ios::trunc);
    if (!log_file) throw Error(ErrorKind::IoError, "cannot write " + log_path.string());
    log_file << "step,mlm_loss,nsp_loss,lr\n";
  }

  for (std::size_t step = 1; step <= cfg.total_steps; ++step) {
    const Batch batch = stream.next();
    const auto out = m.forward(batch.input);
    const auto mlm = nn::cross_entropy(out.mlm_logits, batch.mlm_targets, objectives::kIgnoreId);
    const auto nsp = nn::cross_entropy(out.nsp_logits, batch.nsp_labels, objectives::kIgnoreId);
    const auto loss = nn::add(mlm.loss, nsp.loss);
    const double mlm_value = mlm.loss.value()[0];
    const double nsp_value = nsp.loss.value()[0];
    if (!std::isfinite(mlm_value) || !std::isfinite(nsp_value)) {
      std::string where;
      if (write) {
        meta.step = step - 1;
        save_checkpoint(dir / "last_good.ckpt", m, meta);
        where = "; parameters before the step are in " + (dir / "last_good.ckpt").string();
      }
      throw Error(ErrorKind::NonFiniteLoss, "loss is not finite at step " + std::to_string(step) + where);
    }
    m.params().zero_grad();
    nn::backward(loss);
    const double lr = opt.step(m.params());

    const LossRecord rec{step, mlm_value, nsp_value, lr};
    result.log.push_back(rec);
    if (write) log_file << loss_log_line(rec) << std::flush;
    if (on_step) on_step(rec);
    if (write && cfg.checkpoint_interval > 0 && step % cfg.checkpoint_interval == 0 && step != cfg.total_steps) {
      meta.step = step;
      save_checkpoint(dir / ("step_" + std::to_string(step) + ".ckpt"), m, meta);
    }
  }
  if (write) {
    meta.step = cfg.total_steps;
    result.final_checkpoint = dir / "final.ckpt";
    save_checkpoint(result.final_checkpoint, m, meta);
  }
  return result;
}

PretrainResult pretrain(const RunConfig& cfg, const StepCallback& on_step) {
  if (cfg.paths.corpus.empty() || cfg.paths.vocab.empty()) {
    throw Error(ErrorKind::ConfigError, "paths.corpus and paths.vocab are required");
  }
  const auto corpus = objectives::Corpus::load(cfg.paths.corpus);
  const auto vocab = tokenizer::Vocab::load(cfg.paths.vocab);
  return pretrain(cfg, corpus, vocab, on_step);
}

}  // namespace kombo::harness
