// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "kombo/error.hpp"
#include "kombo/nn/layers.hpp"
#include "nn_test_util.hpp"

using namespace kombo;
using namespace kombo::nn;
using kombo::testing::probe;
using kombo::testing::random_leaf;

namespace {

constexpr double kGradTol = 1e-4;

double max_err(const std::function<Var<double>()>& f, const std::vector<NamedVar>& in) {
  return grad_check(f, in).max_rel_error;
}

}  // namespace

TEST(Affine, IdentityWeightsReturnInput) {
  Tensor<double> eye({2, 2}, std::vector<double>{1, 0, 0, 1});
  auto x = Var<double>::constant(Tensor<double>({2, 2}, std::vector<double>{3, -1, 4, 2}));
  auto y = affine(x, Var<double>::constant(eye), Var<double>::constant(Tensor<double>({2})));
  EXPECT_EQ(y.value().storage(), x.value().storage());
}

TEST(Affine, SmallProduct) {
  auto x = Var<double>::constant(Tensor<double>({1, 2}, std::vector<double>{2, 3}));
  auto w = Var<double>::constant(Tensor<double>({2, 1}, std::vector<double>{1, 1}));
  auto y = affine(x, w, Var<double>::constant(Tensor<double>({1})));
  ASSERT_EQ(y.shape(), (Shape{1, 1}));
  EXPECT_DOUBLE_EQ(y.value()[0], 5.0);
}

TEST(Affine, ShapeMismatchThrows) {
  Rng rng(1);
  auto x = random_leaf({2, 3}, rng);
  auto w = random_leaf({4, 2}, rng);
  try {
    matmul(x, w);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ShapeError);
  }
}

TEST(Affine, GradientMatchesCentralDifferences) {
  Rng rng(2);
  auto x = random_leaf({3, 4}, rng);
  auto w = random_leaf({4, 5}, rng);
  auto b = random_leaf({5}, rng);
  auto f = probe([&] { return affine(x, w, b); });
  EXPECT_LT(max_err(f, {{"x", x}, {"w", w}, {"b", b}}), 1e-6);
}

TEST(GradCheck, DetectsSignFlippedBackward) {
  Rng rng(3);
  auto x = random_leaf({2, 3}, rng);
  auto broken = [&] {
    Tensor<double> out = x.value();
    for (auto& v : out.values()) v *= 2.0;
    return make_result<double>(std::move(out), {x}, [](Node<double>& self) {
      auto& g = self.inputs[0]->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= 2.0 * self.grad[i];
    });
  };
  const double err = max_err(probe(broken), {{"x", x}});
  EXPECT_NEAR(err, 2.0, 1e-6);
}

TEST(GradCheck, NonFiniteLossIsOracleFailure) {
  auto x = Var<double>::leaf(Tensor<double>({1}, std::vector<double>{1.0}), true);
  auto f = [&] { return scale(x, std::numeric_limits<double>::infinity()); };
  try {
    grad_check(f, {{"x", x}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OracleFailure);
  }
}

TEST(Elementwise, GradientsPass) {
  Rng rng(4);
  auto a = random_leaf({2, 3, 4}, rng);
  auto b = random_leaf({2, 3, 4}, rng);
  EXPECT_LT(max_err(probe([&] { return add(a, b); }), {{"a", a}, {"b", b}}), kGradTol);
  EXPECT_LT(max_err(probe([&] { return sub(a, b); }), {{"a", a}, {"b", b}}), kGradTol);
  EXPECT_LT(max_err(probe([&] { return mul(a, b); }), {{"a", a}, {"b", b}}), kGradTol);
  EXPECT_LT(max_err(probe([&] { return sigmoid(a); }), {{"a", a}}), kGradTol);
  EXPECT_LT(max_err(probe([&] { return nn::tanh(a); }), {{"a", a}}), kGradTol);
  EXPECT_LT(max_err(probe([&] { return gelu(a); }), {{"a", a}}), kGradTol);
}

TEST(Gelu, MatchesErfDefinition) {
  auto x = Var<double>::constant(Tensor<double>({3}, std::vector<double>{-1.0, 0.0, 2.0}));
  auto y = gelu(x);
  for (std::size_t i = 0; i < 3; ++i) {
    const double v = x.value()[i];
    EXPECT_NEAR(y.value()[i], 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0))), 1e-15);
  }
}

TEST(LayerNorm, OutputIsCenteredAndGradientPasses) {
  Rng rng(5);
  auto x = random_leaf({2, 3, 8}, rng, 3.0);
  auto g = Var<double>::constant(Tensor<double>({8}, 1.0));
  auto b = Var<double>::constant(Tensor<double>({8}, 0.0));
  auto y = layer_norm(x, g, b);
  for (std::size_t r = 0; r < 6; ++r) {
    double mean = 0;
    for (std::size_t j = 0; j < 8; ++j) mean += y.value()[r * 8 + j];
    EXPECT_NEAR(mean / 8.0, 0.0, 1e-7);
  }
  auto gamma = random_leaf({8}, rng);
  auto beta = random_leaf({8}, rng);
  EXPECT_LT(max_err(probe([&] { return layer_norm(x, gamma, beta, 1e-5); }),
                    {{"x", x}, {"gamma", gamma}, {"beta", beta}}),
            kGradTol);
}

TEST(Embedding, LookupAndGradient) {
  Rng rng(6);
  auto table = random_leaf({5, 3}, rng);
  std::vector<int> ids{0, 4, 4, 2};
  auto e = embedding(ids, 2, 2, table);
  ASSERT_EQ(e.shape(), (Shape{2, 2, 3}));
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(e.value()[3 + j], table.value()[12 + j]);
  EXPECT_LT(max_err(probe([&] { return embedding(ids, 2, 2, table); }), {{"table", table}}), kGradTol);
}

TEST(Embedding, OutOfRangeIdIsVocabError) {
  Rng rng(7);
  auto table = random_leaf({5, 3}, rng);
  try {
    embedding<double>({5}, 1, 1, table);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::VocabError);
  }
}

TEST(Positional, GradientPasses) {
  Rng rng(8);
  auto x = random_leaf({2, 3, 4}, rng);
  auto p = random_leaf({5, 4}, rng);
  EXPECT_LT(max_err(probe([&] { return add_positional(x, p); }), {{"x", x}, {"p", p}}), kGradTol);
}

TEST(GroupOps, GroupSumMatchesSlotSums) {
  Rng rng(9);
  auto x = random_leaf({1, 18, 2}, rng);
  auto s = group_sum(x, 9, 5, 4);
  ASSERT_EQ(s.shape(), (Shape{1, 2, 2}));
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t j = 0; j < 2; ++j) {
      double expect = 0;
      for (std::size_t slot = 5; slot < 9; ++slot) expect += x.value()[(k * 9 + slot) * 2 + j];
      EXPECT_DOUBLE_EQ(s.value()[k * 2 + j], expect);
    }
  }
  EXPECT_LT(max_err(probe([&] { return group_sum(x, 9, 0, 4); }), {{"x", x}}), kGradTol);
}

TEST(GroupOps, GroupSumRejectsRaggedLength) {
  Rng rng(10);
  auto x = random_leaf({1, 7, 2}, rng);
  try {
    group_sum(x, 3, 0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::AlignmentError);
  }
}

TEST(GroupOps, InterleaveRepeatReverseSelectGradients) {
  Rng rng(11);
  auto a = random_leaf({2, 3, 2}, rng);
  auto b = random_leaf({2, 3, 2}, rng);
  EXPECT_LT(max_err(probe([&] { return interleave(a, b); }), {{"a", a}, {"b", b}}), kGradTol);
  EXPECT_LT(max_err(probe([&] { return repeat_rows(a, {2, 1, 3}); }), {{"a", a}}), kGradTol);
  EXPECT_LT(max_err(probe([&] { return reverse_positions(a); }), {{"a", a}}), kGradTol);
  EXPECT_LT(max_err(probe([&] { return select_position(a, 1); }), {{"a", a}}), kGradTol);
  EXPECT_LT(max_err(probe([&] { return reshape(a, {2, 6}); }), {{"a", a}}), kGradTol);
}

TEST(GroupOps, RepeatRowsPattern) {
  auto x = Var<double>::constant(Tensor<double>({1, 2, 1}, std::vector<double>{7, 9}));
  auto y = repeat_rows(x, {2, 1});
  EXPECT_EQ(y.value().storage(), (std::vector<double>{7, 7, 9}));
}

TEST(Attention, SinglePositionWeightsAreOne) {
  Rng rng(12);
  auto q = random_leaf({1, 1, 4}, rng);
  auto k = random_leaf({1, 1, 4}, rng);
  auto v = random_leaf({1, 1, 4}, rng);
  std::vector<double> probs;
  auto out = multihead_attention(q, k, v, 2, {}, &probs);
  ASSERT_EQ(probs.size(), 2u);
  EXPECT_DOUBLE_EQ(probs[0], 1.0);
  EXPECT_EQ(out.value().storage(), v.value().storage());
}

TEST(Attention, RowsSumToOneAndMaskedKeysGetZero) {
  Rng rng(13);
  auto q = random_leaf({2, 5, 6}, rng);
  auto k = random_leaf({2, 5, 6}, rng);
  auto v = random_leaf({2, 5, 6}, rng);
  std::vector<std::uint8_t> mask{1, 1, 1, 0, 0, 1, 1, 1, 1, 1};
  std::vector<double> probs;
  multihead_attention(q, k, v, 3, mask, &probs);
  for (std::size_t row = 0; row < probs.size() / 5; ++row) {
    double total = 0;
    for (std::size_t j = 0; j < 5; ++j) total += probs[row * 5 + j];
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
  EXPECT_EQ(probs[3], 0.0);
  EXPECT_EQ(probs[4], 0.0);
}

TEST(Attention, GradientPasses) {
  Rng rng(14);
  auto q = random_leaf({2, 4, 8}, rng);
  auto k = random_leaf({2, 4, 8}, rng);
  auto v = random_leaf({2, 4, 8}, rng);
  std::vector<std::uint8_t> mask{1, 1, 1, 0, 1, 1, 1, 1};
  EXPECT_LT(max_err(probe([&] { return multihead_attention(q, k, v, 2, mask); }), {{"q", q}, {"k", k}, {"v", v}}),
            kGradTol);
}

TEST(Attention, IndivisibleHeadsIsConfigError) {
  Rng rng(15);
  auto q = random_leaf({1, 2, 6}, rng);
  try {
    multihead_attention(q, q, q, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
  }
}

TEST(TransformerBlockTest, ShapePreservedAndGradientOnFourByEight) {
  Rng rng(16);
  ParameterStore<double> store;
  auto blk = TransformerBlock<double>::make(store, "blk", 8, 2, rng);
  for (auto& p : store.params()) {
    for (auto& v : p.var.mutable_value().values()) v += 0.3 * rng.normal();
  }
  auto x = random_leaf({1, 4, 8}, rng);
  EXPECT_EQ(blk(x).shape(), x.shape());
  std::vector<NamedVar> inputs{{"x", x}};
  for (auto& p : store.params()) inputs.push_back({p.name, p.var});
  EXPECT_LT(max_err(probe([&] { return blk(x); }), inputs), kGradTol);
}

TEST(Gru, ZeroWeightsGiveClosedFormStates) {
  // With zero weights every gate sees 0: z = 0.5, candidate = tanh(0) = 0,
  // so h_t = 0.5 h_{t-1}; from h0 = 0 all states stay 0. A bias of 1 on the
  // candidate makes the first state 0.5 tanh(1) and h_t = 0.5 tanh(1) + 0.5 h_{t-1}.
  const std::size_t H = 2;
  auto x = Var<double>::constant(Tensor<double>({1, 3, 2}, 1.0));
  auto wih = Var<double>::constant(Tensor<double>({2, 3 * H}));
  auto whh = Var<double>::constant(Tensor<double>({H, 3 * H}));
  Tensor<double> bias({3 * H});
  auto zero = gru(x, wih, whh, Var<double>::constant(bias), Var<double>::constant(bias));
  for (double v : zero.value().values()) EXPECT_EQ(v, 0.0);
  bias[2 * H] = bias[2 * H + 1] = 1.0;
  auto out = gru(x, wih, whh, Var<double>::constant(bias), Var<double>::constant(Tensor<double>({3 * H})));
  double h = 0;
  for (std::size_t t = 0; t < 3; ++t) {
    h = 0.5 * std::tanh(1.0) + 0.5 * h;
    EXPECT_NEAR(out.value()[t * H], h, 1e-15);
  }
}

TEST(Gru, LengthOneEqualsSingleCellStep) {
  Rng rng(17);
  auto x = random_leaf({1, 1, 3}, rng);
  auto wih = random_leaf({3, 6}, rng);
  auto whh = random_leaf({2, 6}, rng);
  auto bih = random_leaf({6}, rng);
  auto bhh = random_leaf({6}, rng);
  auto h0 = random_leaf({1, 2}, rng);
  auto out = gru(x, wih, whh, bih, bhh, h0);
  for (std::size_t j = 0; j < 2; ++j) {
    auto gi = [&](std::size_t col) {
      double s = bih.value()[col];
      for (std::size_t i = 0; i < 3; ++i) s += x.value()[i] * wih.value().at(i, col);
      return s;
    };
    auto gh = [&](std::size_t col) {
      double s = bhh.value()[col];
      for (std::size_t i = 0; i < 2; ++i) s += h0.value()[i] * whh.value().at(i, col);
      return s;
    };
    auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    const double r = sig(gi(j) + gh(j));
    const double z = sig(gi(2 + j) + gh(2 + j));
    const double n = std::tanh(gi(4 + j) + r * gh(4 + j));
    EXPECT_NEAR(out.value()[j], (1 - z) * n + z * h0.value()[j], 1e-14);
  }
}

TEST(Gru, GradientThroughThreeSteps) {
  Rng rng(18);
  auto x = random_leaf({2, 3, 3}, rng);
  auto wih = random_leaf({3, 12}, rng, 0.5);
  auto whh = random_leaf({4, 12}, rng, 0.5);
  auto bih = random_leaf({12}, rng);
  auto bhh = random_leaf({12}, rng);
  auto h0 = random_leaf({2, 4}, rng);
  EXPECT_LT(max_err(probe([&] { return gru(x, wih, whh, bih, bhh, h0); }),
                    {{"x", x}, {"w_ih", wih}, {"w_hh", whh}, {"b_ih", bih}, {"b_hh", bhh}, {"h0", h0}}),
            kGradTol);
}

namespace {

// Direct evaluation of the averaged depthwise 2 x w convolution.
std::vector<double> conv_oracle(const Tensor<double>& top, const Tensor<double>& bottom,
                                const std::vector<Tensor<double>>& kernels, const std::vector<Tensor<double>>& biases) {
  const std::size_t m = top.dim(1), d = top.dim(2);
  std::vector<double> out(m * d, 0.0);
  for (std::size_t k = 0; k < kernels.size(); ++k) {
    const std::size_t w = kernels[k].dim(0) / 2;
    const long left = static_cast<long>((w - 1) / 2);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t c = 0; c < d; ++c) {
        double acc = biases[k][c];
        for (std::size_t j = 0; j < w; ++j) {
          const long col = static_cast<long>(i) - left + static_cast<long>(j);
          if (col < 0 || col >= static_cast<long>(m)) continue;
          acc += top.at(0, col, c) * kernels[k].at(j, c) + bottom.at(0, col, c) * kernels[k].at(w + j, c);
        }
        out[i * d + c] += acc / static_cast<double>(kernels.size());
      }
    }
  }
  return out;
}

}  // namespace

TEST(ConvFuse, SelectorKernelReturnsTopRow) {
  Rng rng(19);
  auto top = random_leaf({1, 3, 2}, rng);
  auto bottom = random_leaf({1, 3, 2}, rng);
  auto kern = Var<double>::constant(Tensor<double>({2, 2}, std::vector<double>{1, 1, 0, 0}));
  auto bias = Var<double>::constant(Tensor<double>({2}));
  auto y = conv_fuse(top, bottom, {kern}, {bias});
  EXPECT_EQ(y.value().storage(), top.value().storage());
}

TEST(ConvFuse, HalfKernelReturnsRowMean) {
  Rng rng(20);
  auto top = random_leaf({1, 3, 2}, rng);
  auto bottom = random_leaf({1, 3, 2}, rng);
  auto kern = Var<double>::constant(Tensor<double>({2, 2}, 0.5));
  auto y = conv_fuse(top, bottom, {kern}, {Var<double>::constant(Tensor<double>({2}))});
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_NEAR(y.value()[i], 0.5 * (top.value()[i] + bottom.value()[i]), 1e-15);
  }
}

TEST(ConvFuse, KernelSetMatchesDirectSummation) {
  Rng rng(21);
  auto top = random_leaf({1, 3, 2}, rng);
  auto bottom = random_leaf({1, 3, 2}, rng);
  auto k1 = random_leaf({2, 2}, rng);
  auto k2 = random_leaf({4, 2}, rng);
  auto b1 = random_leaf({2}, rng);
  auto b2 = random_leaf({2}, rng);
  auto y = conv_fuse(top, bottom, {k1, k2}, {b1, b2});
  auto expect = conv_oracle(top.value(), bottom.value(), {k1.value(), k2.value()}, {b1.value(), b2.value()});
  for (std::size_t i = 0; i < expect.size(); ++i) EXPECT_NEAR(y.value()[i], expect[i], 1e-14);
  auto k3 = random_leaf({6, 2}, rng);
  auto b3 = random_leaf({2}, rng);
  EXPECT_LT(max_err(probe([&] { return conv_fuse(top, bottom, {k1, k2, k3}, {b1, b2, b3}); }),
                    {{"top", top}, {"bottom", bottom}, {"k1", k1}, {"k2", k2}, {"k3", k3}, {"b1", b1}, {"b3", b3}}),
            kGradTol);
}

TEST(ConvFuse, KernelWiderThanSequenceIsConfigError) {
  Rng rng(22);
  auto top = random_leaf({1, 2, 2}, rng);
  auto k = random_leaf({6, 2}, rng);
  try {
    conv_fuse(top, top, {k}, {random_leaf({2}, rng)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
  }
}

TEST(AttentionPool, IdenticalRowsReturnThatRowAndGradientPasses) {
  Rng rng(23);
  Tensor<double> same({1, 3, 2}, std::vector<double>{1.5, -2, 1.5, -2, 1.5, -2});
  auto q = random_leaf({2}, rng);
  auto y = group_attention_pool(Var<double>::constant(same), q, 3);
  EXPECT_NEAR(y.value()[0], 1.5, 1e-15);
  EXPECT_NEAR(y.value()[1], -2.0, 1e-15);
  auto x = random_leaf({2, 6, 3}, rng);
  auto q3 = random_leaf({3}, rng);
  EXPECT_LT(max_err(probe([&] { return group_attention_pool(x, q3, 3); }), {{"x", x}, {"q", q3}}), kGradTol);
}

TEST(CrossEntropyTest, UniformLogitsGiveLogV) {
  auto logits = Var<double>::constant(Tensor<double>({3, 7}, 0.25));
  auto ce = cross_entropy(logits, {1, 6, 0}, -100);
  EXPECT_NEAR(ce.loss.value()[0], std::log(7.0), 1e-15);
  EXPECT_EQ(ce.counted, 3u);
}

TEST(CrossEntropyTest, LargeMarginApproachesZero) {
  Tensor<double> t({1, 3});
  t[2] = 60.0;
  auto ce = cross_entropy(Var<double>::constant(t), {2}, -100);
  EXPECT_LT(ce.loss.value()[0], 1e-20);
}

TEST(CrossEntropyTest, MatchesDirectSoftmaxAndGradient) {
  Rng rng(24);
  auto logits = random_leaf({4, 5}, rng);
  std::vector<int> targets{3, -100, 0, 4};
  auto ce = cross_entropy(logits, targets, -100);
  double expect = 0;
  for (std::size_t r : {0u, 2u, 3u}) {
    double z = 0;
    for (std::size_t j = 0; j < 5; ++j) z += std::exp(logits.value().at(r, j));
    expect += -std::log(std::exp(logits.value().at(r, static_cast<std::size_t>(targets[r]))) / z);
  }
  EXPECT_NEAR(ce.loss.value()[0], expect / 3.0, 1e-12);
  EXPECT_LT(max_err([&] { return cross_entropy(logits, targets, -100).loss; }, {{"logits", logits}}), kGradTol);
}

TEST(CrossEntropyTest, AllIgnoredIsZeroWithFlag) {
  Rng rng(25);
  auto logits = random_leaf({2, 3}, rng);
  auto ce = cross_entropy(logits, {-1, -1}, -1);
  EXPECT_TRUE(ce.all_ignored);
  EXPECT_EQ(ce.loss.value()[0], 0.0);
}
