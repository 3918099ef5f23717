// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "kombo/harness/run_config.hpp"
#include "kombo/model/model.hpp"
#include "kombo/objectives/nsp.hpp"
#include "kombo/tokenizer/vocab.hpp"

namespace kombo::harness {

struct LossRecord {
  std::size_t step = 0;
  double mlm_loss = 0.0;
  double nsp_loss = 0.0;
  double lr = 0.0;
  friend bool operator==(const LossRecord&, const LossRecord&) = default;
};

/// `step,mlm_loss,nsp_loss,lr` with a header line.
std::string loss_log_csv(const std::vector<LossRecord>& log);
std::string loss_log_line(const LossRecord& r);

struct PretrainResult {
  std::vector<LossRecord> log;
  std::unique_ptr<model::KomboModel<float>> model;
  std::filesystem::path final_checkpoint;  // empty without a checkpoint_dir
  bool positive_only = false;              // NSP had no negatives to draw
};

/// Called after every step.
using StepCallback = std::function<void(const LossRecord&)>;

/// Trains from an in-memory corpus and vocabulary. `cfg.model.vocab_size`
/// may be 0, meaning the vocabulary size; otherwise it must match. Files are
/// written only when cfg.paths.checkpoint_dir is set: `step_<n>.ckpt` every
/// checkpoint_interval steps, `final.ckpt` and the loss log.
///
/// Throws NoData for an empty corpus and NonFiniteLoss when a loss stops
/// being finite; in that case `last_good.ckpt` holds the parameters from
/// before the failing step.
PretrainResult pretrain(const RunConfig& cfg, const objectives::Corpus& corpus, const tokenizer::Vocab& vocab,
                        const StepCallback& on_step = {});

/// Loads corpus and vocabulary from cfg.paths.
PretrainResult pretrain(const RunConfig& cfg, const StepCallback& on_step = {});

}  // namespace kombo::harness
