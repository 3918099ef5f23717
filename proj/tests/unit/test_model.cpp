// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "kombo/error.hpp"
#include "model_test_util.hpp"
#include "nn_test_util.hpp"

using namespace kombo;
using namespace kombo::model;
using hangul::SchemeKind;
using hangul::UnitScheme;
using kombo::testing::batch_of;
using kombo::testing::micro_config;

namespace {

tokenizer::Tokenizer tokenizer_for(SchemeKind kind) {
  return tokenizer::Tokenizer(tokenizer::Vocab::build(std::vector<std::string>{"훈민정음 가나다."}, UnitScheme::of(kind)));
}

void expect_error(ErrorKind kind, const std::function<void()>& f) {
  try {
    f();
    FAIL() << "expected " << to_string(kind);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

}  // namespace

TEST(ShapeChain, HunminjeongeumUnderJamo) {
  const auto tok = tokenizer_for(SchemeKind::Jamo);
  const auto x = batch_of(tok.encode("훈민정음"));
  KomboModel<double> m(micro_config(SchemeKind::Jamo, tok.vocab().size()), 1);
  const auto out = m.forward(x);
  EXPECT_EQ(out.e.shape(), (nn::Shape{1, 12, 8}));
  EXPECT_EQ(out.h.shape(), (nn::Shape{1, 12, 8}));
  EXPECT_EQ(out.merge.h_c.shape(), (nn::Shape{1, 4, 8}));
  EXPECT_EQ(out.merge.h_r.shape(), (nn::Shape{1, 8, 8}));
  EXPECT_EQ(out.h_c_prime.shape(), (nn::Shape{1, 4, 8}));
  EXPECT_EQ(out.restore.h_r_prime.shape(), (nn::Shape{1, 8, 8}));
  EXPECT_EQ(out.restore.h_prime.shape(), (nn::Shape{1, 12, 8}));
  EXPECT_EQ(out.mlm_logits.shape(), (nn::Shape{1, 12, tok.vocab().size()}));
  EXPECT_EQ(out.nsp_logits.shape(), (nn::Shape{1, 2}));
}

TEST(ShapeChain, TwoCharactersUnderStroke) {
  const auto tok = tokenizer_for(SchemeKind::Stroke);
  const auto x = batch_of(tok.encode("정음"));
  ASSERT_EQ(x.length, 18u);
  KomboModel<double> m(micro_config(SchemeKind::Stroke, tok.vocab().size()), 2);
  const auto out = m.forward(x);
  EXPECT_EQ(out.merge.h_c.shape(), (nn::Shape{1, 2, 8}));
  EXPECT_EQ(out.restore.h_r_prime.shape(), (nn::Shape{1, 4, 8}));
  EXPECT_EQ(out.restore.h_prime.shape(), (nn::Shape{1, 18, 8}));
}

TEST(ShapeChain, EverySchemeFollowsNToMTo2MToN) {
  for (auto kind : {SchemeKind::Jamo, SchemeKind::Stroke, SchemeKind::Cji, SchemeKind::Bts, SchemeKind::Character}) {
    const auto tok = tokenizer_for(kind);
    auto seq = tok.encode("훈민정", {.add_cls_sep = true});
    const std::size_t n = seq.ids.size();
    const std::size_t mchars = n / static_cast<std::size_t>(tok.tokens_per_char());
    KomboModel<double> m(micro_config(kind, tok.vocab().size()), 3);
    const auto out = m.forward(batch_of(seq));
    EXPECT_EQ(out.merge.h_c.shape()[1], mchars);
    EXPECT_EQ(out.restore.h_r_prime.shape()[1], 2 * mchars);
    EXPECT_EQ(out.restore.h_prime.shape()[1], n);
  }
}

TEST(Embed, PadRowIsLookupAndRepeatedIdsDifferByPosition) {
  const auto tok = tokenizer_for(SchemeKind::Jamo);
  KomboModel<double> m(micro_config(SchemeKind::Jamo, tok.vocab().size()), 4);
  IdBatch x{{0, 7, 7, 0, 0, 0}, 1, 6};
  const auto e = m.embed(x);
  const auto& tok_table = m.params().find("embed.token")->var.value();
  const auto& pos_table = m.params().find("embed.position")->var.value();
  for (std::size_t j = 0; j < 8; ++j) {
    EXPECT_DOUBLE_EQ(e.value().at(0, 0, j), tok_table.at(0, j) + pos_table.at(0, j));
    EXPECT_NEAR(e.value().at(0, 2, j) - e.value().at(0, 1, j), pos_table.at(2, j) - pos_table.at(1, j), 1e-15);
  }
  expect_error(ErrorKind::VocabError, [&] { m.embed({{static_cast<int>(tok.vocab().size())}, 1, 1}); });
}

TEST(Contextualize, BypassReturnsEmbeddingExactly) {
  auto cfg = micro_config(SchemeKind::Jamo, 80);
  cfg.ablations.no_contextualization = true;
  KomboModel<double> m(cfg, 5);
  const auto e = m.embed({{8, 9, 10}, 1, 3});
  EXPECT_EQ(m.contextualize(e).value().storage(), e.value().storage());
}

TEST(Merge, SelectorKernelGivesInitialPlusVowel) {
  auto cfg = micro_config(SchemeKind::Jamo, 80);
  KomboModel<double> m(cfg, 6);
  auto& kernel = m.params().params();
  for (auto& p : kernel) {
    if (p.name == "merge.kernel0") {
      auto& w = p.var.mutable_value();
      for (std::size_t j = 0; j < 8; ++j) {
        w.at(0, j) = 1.0;
        w.at(1, j) = 0.0;
      }
    }
  }
  nn::Rng rng(7);
  auto h = kombo::testing::random_leaf({2, 12, 8}, rng);
  const auto merged = m.merge_characters(h);
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t k = 0; k < 4; ++k) {
      for (std::size_t j = 0; j < 8; ++j) {
        const double expect = h.value().at(b, 3 * k, j) + h.value().at(b, 3 * k + 1, j);
        EXPECT_NEAR(merged.h_c.value().at(b, k, j), expect, 1e-12);
      }
    }
  }
}

TEST(Merge, StrokeGroupsMatchSlotSums) {
  KomboModel<double> m(micro_config(SchemeKind::Stroke, 80), 8);
  nn::Rng rng(9);
  auto h = kombo::testing::random_leaf({1, 18, 8}, rng);
  const auto merged = m.merge_characters(h);
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t j = 0; j < 8; ++j) {
      double cho = 0, jong = 0;
      for (std::size_t s = 0; s < 4; ++s) cho += h.value().at(0, 9 * k + s, j);
      for (std::size_t s = 5; s < 9; ++s) jong += h.value().at(0, 9 * k + s, j);
      EXPECT_NEAR(merged.h_iv.value().at(0, k, j), cho + h.value().at(0, 9 * k + 4, j), 1e-12);
      EXPECT_NEAR(merged.h_f.value().at(0, k, j), jong, 1e-12);
    }
  }
}

TEST(Merge, RaggedLengthIsAlignmentError) {
  KomboModel<double> m(micro_config(SchemeKind::Jamo, 80), 10);
  nn::Rng rng(11);
  auto h = kombo::testing::random_leaf({1, 10, 8}, rng);
  expect_error(ErrorKind::AlignmentError, [&] { m.merge_characters(h); });
}

TEST(Merge, NoJongsungAdditionSumsAllThreeRoles) {
  auto cfg = micro_config(SchemeKind::Jamo, 80);
  cfg.ablations.no_jongsung_addition = true;
  KomboModel<double> m(cfg, 12);
  EXPECT_EQ(m.params().find("merge.kernel0"), nullptr);
  nn::Rng rng(13);
  auto h = kombo::testing::random_leaf({1, 6, 8}, rng);
  const auto merged = m.merge_characters(h);
  for (std::size_t j = 0; j < 8; ++j) {
    EXPECT_NEAR(merged.h_c.value().at(0, 1, j),
                h.value().at(0, 3, j) + h.value().at(0, 4, j) + h.value().at(0, 5, j), 1e-12);
  }
}

TEST(Stack, ZeroLayersIsIdentity) {
  auto cfg = micro_config(SchemeKind::Jamo, 80);
  cfg.layers = 0;
  KomboModel<double> m(cfg, 14);
  nn::Rng rng(15);
  auto x = kombo::testing::random_leaf({1, 4, 8}, rng);
  EXPECT_EQ(m.encode_stack(x).value().storage(), x.value().storage());
}

TEST(Restore, IdentityLinearWithoutResidualIsPureRepeat) {
  auto cfg = micro_config(SchemeKind::Jamo, 80);
  cfg.restore = {RestoreCell::Linear, false, false};
  KomboModel<double> m(cfg, 16);
  for (auto& p : m.params().params()) {
    if (p.name == "restore.cell.weight") {
      auto& w = p.var.mutable_value();
      w.fill(0.0);
      for (std::size_t j = 0; j < 8; ++j) w.at(j, j) = 1.0;
    }
  }
  nn::Rng rng(17);
  auto hc = kombo::testing::random_leaf({1, 2, 8}, rng);
  auto h = kombo::testing::random_leaf({1, 6, 8}, rng);
  const auto out = m.restore(hc, {}, h);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 8; ++j) EXPECT_DOUBLE_EQ(out.h_prime.value().at(0, i, j), hc.value().at(0, i / 3, j));
  }
}

TEST(Restore, HierarchicalWithoutIntermediatesIsConfigError) {
  KomboModel<double> m(micro_config(SchemeKind::Jamo, 80), 18);
  nn::Rng rng(19);
  auto hc = kombo::testing::random_leaf({1, 2, 8}, rng);
  auto h = kombo::testing::random_leaf({1, 6, 8}, rng);
  expect_error(ErrorKind::ConfigError, [&] { m.restore(hc, {}, h); });
}

TEST(AltDownsample, AttentionPoolStaysInConvexHull) {
  auto cfg = micro_config(SchemeKind::Jamo, 80);
  cfg.ablations.alt_downsample = Downsample::AttentionPool;
  cfg.restore.hierarchical = false;
  KomboModel<double> m(cfg, 20);
  nn::Rng rng(21);
  auto h = kombo::testing::random_leaf({2, 9, 8}, rng);
  const auto pooled = m.alt_downsample(h);
  ASSERT_EQ(pooled.shape(), (nn::Shape{2, 3, 8}));
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t k = 0; k < 3; ++k) {
      for (std::size_t j = 0; j < 8; ++j) {
        double lo = 1e300, hi = -1e300;
        for (std::size_t s = 0; s < 3; ++s) {
          lo = std::min(lo, h.value().at(b, 3 * k + s, j));
          hi = std::max(hi, h.value().at(b, 3 * k + s, j));
        }
        EXPECT_GE(pooled.value().at(b, k, j), lo - 1e-12);
        EXPECT_LE(pooled.value().at(b, k, j), hi + 1e-12);
      }
    }
  }
}

TEST(AltDownsample, LinearPoolWithBlockAveragingGivesRowMean) {
  auto cfg = micro_config(SchemeKind::Jamo, 80);
  cfg.ablations.alt_downsample = Downsample::LinearPool;
  cfg.restore.hierarchical = false;
  KomboModel<double> m(cfg, 22);
  for (auto& p : m.params().params()) {
    if (p.name == "pool.linear.weight") {
      auto& w = p.var.mutable_value();
      w.fill(0.0);
      for (std::size_t s = 0; s < 3; ++s) {
        for (std::size_t j = 0; j < 8; ++j) w.at(s * 8 + j, j) = 1.0 / 3.0;
      }
    }
  }
  nn::Rng rng(23);
  auto h = kombo::testing::random_leaf({1, 6, 8}, rng);
  const auto pooled = m.alt_downsample(h);
  ASSERT_EQ(pooled.shape(), (nn::Shape{1, 2, 8}));
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t j = 0; j < 8; ++j) {
      double mean = 0;
      for (std::size_t s = 0; s < 3; ++s) mean += h.value().at(0, 3 * k + s, j) / 3.0;
      EXPECT_NEAR(pooled.value().at(0, k, j), mean, 1e-12);
    }
  }
}

TEST(Config, ValidationErrors) {
  auto cfg = micro_config(SchemeKind::Jamo, 80);
  cfg.heads = 3;
  expect_error(ErrorKind::ConfigError, [&] { cfg.validate(); });
  cfg = micro_config(SchemeKind::Jamo, 80);
  cfg.max_len = 20;
  expect_error(ErrorKind::ConfigError, [&] { cfg.validate(); });
  cfg = micro_config(SchemeKind::Jamo, 80);
  cfg.merge.kernels = {{3, 1}};
  expect_error(ErrorKind::ConfigError, [&] { cfg.validate(); });
  cfg = micro_config(SchemeKind::Jamo, 80);
  cfg.ablations.alt_downsample = Downsample::LinearPool;
  expect_error(ErrorKind::ConfigError, [&] { cfg.validate(); });
}

TEST(Config, JsonRoundTripAndUnknownKey) {
  auto cfg = micro_config(SchemeKind::Bts, 90);
  cfg.merge.kernels = {{2, 1}, {2, 2}};
  cfg.restore = {RestoreCell::Linear, true, false};
  cfg.bidirectional_gru = true;
  EXPECT_EQ(ModelConfig::from_json(cfg.to_json()), cfg);
  auto j = cfg.to_json();
  j["dropout"] = 0.1;
  expect_error(ErrorKind::ConfigError, [&] { ModelConfig::from_json(j); });
}

TEST(ParamCount, ShapeListMatchesConstructedModel) {
  std::vector<ModelConfig> configs;
  configs.push_back(micro_config(SchemeKind::Jamo, 80));
  auto c = micro_config(SchemeKind::Bts, 50);
  c.bidirectional_gru = true;
  c.merge.kernels = {{2, 1}, {2, 3}};
  c.restore = {RestoreCell::Linear, false, true};
  configs.push_back(c);
  c = micro_config(SchemeKind::Cji, 60);
  c.ablations.alt_downsample = Downsample::LinearPool;
  c.restore.hierarchical = false;
  configs.push_back(c);
  c = micro_config(SchemeKind::Jamo, 60);
  c.ablations.no_merge = true;
  c.ablations.no_contextualization = true;
  configs.push_back(c);
  for (const auto& cfg : configs) {
    KomboModel<float> m(cfg, 1);
    const auto shapes = parameter_shapes(cfg);
    ASSERT_EQ(shapes.size(), m.params().params().size());
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      EXPECT_EQ(shapes[i].name, m.params().params()[i].name);
      EXPECT_EQ(shapes[i].shape, m.params().params()[i].var.shape());
    }
    EXPECT_EQ(param_count(cfg).total, m.params().scalar_count());
  }
}

TEST(ParamCount, MicroConfigHandSum) {
  // D = 8, V = 80, max_len = 24, one local and one stack block, Jamo,
  // a single (2x1) kernel, GRU restoration with HR.
  const std::size_t d = 8, v = 80;
  const std::size_t block = 2 * (2 * d) + 4 * (d * d + d) + (d * 4 * d + 4 * d) + (4 * d * d + d);
  const std::size_t gru = 2 * (d * 3 * d) + 2 * (3 * d);
  const std::size_t expect = v * d + 24 * d     // embeddings
                             + block + gru       // contextualization
                             + 2 * d + d         // merge kernel and bias
                             + block + 2 * d     // stack and final layer norm
                             + 2 * gru           // two restoration stages
                             + 2 * d             // MLM head layer norm
                             + (d * v + v)       // MLM head
                             + (d * 2 + 2);      // NSP head
  const auto r = param_count(micro_config(SchemeKind::Jamo, v));
  EXPECT_EQ(r.total, expect);
  EXPECT_EQ(r.token_embedding, v * d);
}

TEST(ParamCount, ZeroLayerConfigIsEmbeddingsPlusHeads) {
  auto cfg = micro_config(SchemeKind::Jamo, 80);
  cfg.layers = 0;
  cfg.ablations.no_contextualization = true;
  cfg.ablations.no_merge = true;
  const auto r = param_count(cfg);
  EXPECT_EQ(r.total, r.token_embedding + r.positional_embedding + r.heads);
}

TEST(ParamCount, JamoTableShareOfSubwordTable) {
  EXPECT_DOUBLE_EQ(embedding_share_percent(170, 32000), 0.53125);
}

TEST(Gradients, EndToEndMicroModel) {
  const auto tok = tokenizer_for(SchemeKind::Jamo);
  KomboModel<double> m(micro_config(SchemeKind::Jamo, tok.vocab().size()), 24);
  kombo::testing::jitter(m, 25);
  EXPECT_LT(kombo::testing::model_grad_error(m, batch_of(tok.encode("훈민정음"))), 1e-4);
}

TEST(Gradients, ContextualizeAndStackFragments) {
  auto cfg = micro_config(SchemeKind::Jamo, 80);
  cfg.layers = 2;
  cfg.bidirectional_gru = true;
  KomboModel<double> m(cfg, 26);
  kombo::testing::jitter(m, 27);
  nn::Rng rng(28);
  auto e = kombo::testing::random_leaf({1, 6, 8}, rng);
  auto hc = kombo::testing::random_leaf({1, 4, 8}, rng);
  std::vector<nn::NamedVar> in_ctx{{"e", e}}, in_stack{{"hc", hc}};
  for (auto& p : m.params().params()) {
    if (p.name.rfind("context.", 0) == 0) in_ctx.push_back({p.name, p.var});
    if (p.name.rfind("stack.", 0) == 0) in_stack.push_back({p.name, p.var});
  }
  EXPECT_LT(nn::grad_check(kombo::testing::probe([&] { return m.contextualize(e); }), in_ctx).max_rel_error, 1e-4);
  EXPECT_LT(nn::grad_check(kombo::testing::probe([&] { return m.encode_stack(hc); }), in_stack).max_rel_error, 1e-4);
}

TEST(Gradients, MergeRestoreMicroModelAcrossVariants) {
  const auto tok = tokenizer_for(SchemeKind::Jamo);
  const auto x = batch_of(tok.encode("훈민"));
  for (auto cell : {RestoreCell::Gru, RestoreCell::Linear}) {
    for (bool hr : {false, true}) {
      auto cfg = micro_config(SchemeKind::Jamo, tok.vocab().size());
      cfg.d_model = 4;
      cfg.heads = 1;
      cfg.merge.kernels = {{2, 1}, {2, 2}};
      cfg.restore = {cell, hr, true};
      KomboModel<double> m(cfg, 29);
      kombo::testing::jitter(m, 30);
      EXPECT_LT(kombo::testing::model_grad_error(m, x, 8), 1e-4) << to_string(cell) << " hr=" << hr;
    }
  }
}

TEST(Determinism, SameSeedSameForward) {
  const auto tok = tokenizer_for(SchemeKind::Cji);
  const auto x = batch_of(tok.encode("훈민정음"));
  KomboModel<float> a(micro_config(SchemeKind::Cji, tok.vocab().size()), 31);
  KomboModel<float> b(micro_config(SchemeKind::Cji, tok.vocab().size()), 31);
  EXPECT_EQ(a.forward(x).mlm_logits.value().storage(), b.forward(x).mlm_logits.value().storage());
}
