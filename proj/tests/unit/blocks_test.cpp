// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>
#include <torch/torch.h>

#include "swinmark/blocks.hpp"
#include "swinmark/layout.hpp"
#include "swinmark/rng.hpp"

namespace swinmark::blocks {
namespace {

// X[k] = s(k) * sum_i x[i] cos(pi (2i + 1) k / 2N), s(0) = sqrt(1/N), else sqrt(2/N).
torch::Tensor naive_dct(const torch::Tensor& x) {
  auto xd = x.to(torch::kFloat64);
  const auto n = xd.size(0);
  auto out = torch::zeros_like(xd);
  for (int64_t k = 0; k < n; ++k) {
    const double s = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int64_t i = 0; i < n; ++i) {
      out[k] += xd[i] * s * std::cos(std::numbers::pi * (2 * i + 1) * k / (2.0 * n));
    }
  }
  return out;
}

TEST(Dct, ConstantGivesOnlyDcCoefficient) {
  const int64_t n = 16;
  auto x = torch::full({1, n, 3}, 0.7f);
  auto c = dct_per_channel(x);
  EXPECT_NEAR(c[0][0][1].item<double>(), std::sqrt(16.0) * 0.7, 1e-5);
  EXPECT_LE(c.slice(1, 1).abs().max().item<double>(), 1e-5);
}

TEST(Dct, RoundTripAndParseval) {
  Rng rng(1);
  auto x = torch::randn({2, 64, 5}, rng.generator());
  auto c = dct_per_channel(x);
  EXPECT_LE((idct_per_channel(c) - x).abs().max().item<double>(), 1e-5);
  auto energy_x = x.pow(2).sum({1}).sqrt();
  auto energy_c = c.pow(2).sum({1}).sqrt();
  EXPECT_LE((energy_x - energy_c).abs().max().item<double>(), 1e-5);
}

TEST(Dct, MatchesNaiveCosineSum) {
  Rng rng(2);
  auto x = torch::randn({1, 16, 1}, rng.generator());
  auto fast = dct_per_channel(x).view({16}).to(torch::kFloat64);
  EXPECT_LE((fast - naive_dct(x.view({16}))).abs().max().item<double>(), 1e-5);
}

TEST(LocalChannelBlock, ZeroReductionIsIdentity) {
  Rng rng(3);
  LocalChannelBlock block(4, 4, 2, 8, 8);
  init_weights(*block, rng);
  {
    torch::NoGradGuard no_grad;
    block->reduce->weight.zero_();
    block->reduce->bias.zero_();
  }
  auto x = torch::randn({2, 16, 16}, rng.generator());
  EXPECT_TRUE(torch::equal(block->forward(x), x));
}

TEST(LocalChannelBlock, GateInUnitIntervalAndShapePreserved) {
  Rng rng(4);
  LocalChannelBlock block(8, 4, 2, 16, 16);
  init_weights(*block, rng);
  auto x = torch::randn({3, 64, 32}, rng.generator()) * 3;
  auto g = block->gate(x);
  EXPECT_EQ(g.sizes(), (torch::IntArrayRef{3, 8}));
  EXPECT_TRUE((g > 0).all().item<bool>());
  EXPECT_TRUE((g < 1).all().item<bool>());
  EXPECT_EQ(block->forward(x).sizes(), x.sizes());
}

TEST(LocalChannelBlock, BiasEqualsGatedChannelFeatures) {
  Rng rng(5);
  LocalChannelBlock block(2, 4, 2, 4, 4);
  init_weights(*block, rng);
  auto x = torch::randn({1, 4, 8}, rng.generator());
  auto image = unpatchify(x, 2, 4, 4);
  auto hidden = torch::gelu(block->expand(image));
  auto features = block->reduce(block->depthwise(hidden));
  auto expected = image + features * block->gate(x).view({1, 2, 1, 1});
  EXPECT_TRUE(torch::allclose(unpatchify(block->forward(x), 2, 4, 4), expected, 1e-6, 1e-6));
}

LcestbImpl::Options small_options(bool use_lceb) {
  LcestbImpl::Options o{};
  o.channels = 4;
  o.height = 32;
  o.width = 32;
  o.patch = 2;
  o.heads = 2;
  o.window = 4;
  o.use_lceb = use_lceb;
  return o;
}

TEST(Lcestb, WithoutLocalBranchEqualsSwinPair) {
  Rng rng(6);
  Lcestb block(small_options(false));
  init_weights(*block, rng);
  EXPECT_TRUE(block->lce.is_empty());
  auto x = torch::randn({2, 256, 16}, rng.generator());
  auto out = block->forward(x);
  EXPECT_EQ(out.sizes(), x.sizes());
  EXPECT_TRUE(torch::equal(out, block->swin->forward(x)));
}

TEST(Lcestb, LocalBranchChangesOutput) {
  Rng rng(7);
  Lcestb block(small_options(true));
  init_weights(*block, rng);
  auto x = torch::randn({2, 256, 16}, rng.generator());
  auto out = block->forward(x);
  EXPECT_EQ(out.sizes(), x.sizes());
  EXPECT_FALSE(torch::allclose(out, block->swin->forward(x)));
}

TEST(VitBlock, EqualsFullWindowSwinBlockWithZeroBias) {
  Rng rng(8);
  const int64_t dim = 16, heads = 4;
  VitBlock vit(dim, heads, 4);
  SwinBlock swin(dim, AttentionParams{4, 0, heads}, 4, 4, 4);
  init_weights(*vit, rng);
  init_weights(*swin, rng);
  {
    torch::NoGradGuard no_grad;
    auto src = vit->named_parameters();
    auto dst = swin->named_parameters();
    for (const auto& item : src) dst[item.key()].copy_(item.value());
    EXPECT_EQ(swin->attn->position_bias_table.abs().max().item<float>(), 0.f);
  }
  auto x = torch::randn({2, 16, dim}, rng.generator());
  EXPECT_LE((vit->forward(x) - swin->forward(x)).abs().max().item<double>(), 1e-5);
}

TEST(VitBlock, ZeroWeightsGiveIdentity) {
  VitBlock vit(8, 2, 4);
  {
    torch::NoGradGuard no_grad;
    for (auto& p : vit->named_parameters()) {
      if (p.key().find("norm") == std::string::npos) p.value().zero_();
    }
  }
  auto x = torch::randn({2, 9, 8});
  EXPECT_TRUE(torch::equal(vit->forward(x), x));
}

TEST(FrequencyBlock, DisabledIsIdentity) {
  FrequencyBlock block(8, 16, false);
  auto x = torch::randn({2, 16, 8});
  EXPECT_TRUE(torch::equal(block->forward(x), x));
  EXPECT_EQ(block->parameters().size(), 0u);
}

TEST(FrequencyBlock, SaturatedGateIsIdentity) {
  FrequencyBlock block(8, 16, true);
  {
    torch::NoGradGuard no_grad;
    block->fc->weight.zero_();
    block->fc->bias.fill_(100.f);
  }
  auto x = torch::randn({2, 16, 8});
  EXPECT_TRUE(torch::equal(block->gate(x), torch::ones({2, 8})));
  EXPECT_TRUE(torch::equal(block->forward(x), x));
}

TEST(FrequencyBlock, GateMatchesSpectrumReduction) {
  Rng rng(9);
  FrequencyBlock block(6, 16, true);
  init_weights(*block, rng);
  auto x = torch::randn({2, 16, 6}, rng.generator());
  auto g = block->gate(x);
  EXPECT_TRUE((g > 0).all().item<bool>() && (g < 1).all().item<bool>());
  auto expected = torch::sigmoid(block->fc(dct_per_channel(x).abs().mean(1)));
  EXPECT_TRUE(torch::allclose(g, expected, 1e-6, 1e-6));
  EXPECT_TRUE(torch::allclose(block->forward(x), x * expected.unsqueeze(1), 1e-6, 1e-6));
}

TEST(Fetb, EmptyAndDisabledIsIdentity) {
  Fetb block(8, 16, 2, 0, 4, false);
  auto x = torch::randn({2, 16, 8});
  EXPECT_TRUE(torch::equal(block->forward(x), x));
}

TEST(Fetb, ShapeAndGradientReachEveryVitParameter) {
  Rng rng(10);
  Fetb block(16, 256, 4, 2, 4, true);
  init_weights(*block, rng);
  auto x = torch::randn({2, 256, 16}, rng.generator());
  auto out = block->forward(x);
  EXPECT_EQ(out.sizes(), x.sizes());
  out.pow(2).sum().backward();
  for (const auto& p : block->vit->named_parameters()) {
    ASSERT_TRUE(p.value().grad().defined()) << p.key();
    EXPECT_GT(p.value().grad().abs().sum().item<double>(), 0.0) << p.key();
  }
}

TEST(InitWeights, FollowsDeclaredDistributions) {
  Rng rng(11);
  torch::nn::Sequential seq(torch::nn::Linear(256, 256), torch::nn::Conv2d(torch::nn::Conv2dOptions(32, 64, 3)),
                            torch::nn::LayerNorm(torch::nn::LayerNormOptions({16})));
  init_weights(*seq, rng);
  auto lin = seq[0]->as<torch::nn::Linear>();
  EXPECT_LE(lin->weight.abs().max().item<double>(), 0.04 + 1e-7);
  // std of N(0, 0.02) truncated at 2 sigma is 0.02 * 0.8796
  EXPECT_NEAR(lin->weight.std().item<double>(), 0.02 * 0.8796, 5e-4);
  EXPECT_EQ(lin->bias.abs().max().item<double>(), 0.0);
  auto conv = seq[1]->as<torch::nn::Conv2d>();
  EXPECT_NEAR(conv->weight.std().item<double>(), 1.0 / std::sqrt(32.0 * 9.0), 3e-3);
  auto ln = seq[2]->as<torch::nn::LayerNorm>();
  EXPECT_TRUE(torch::equal(ln->weight, torch::ones({16})));
  EXPECT_TRUE(torch::equal(ln->bias, torch::zeros({16})));
}

TEST(InitWeights, DeterministicPerSeed) {
  Rng a(12), b(12);
  SwinPair x(16, 2, 2, 4, 4, 4), y(16, 2, 2, 4, 4, 4);
  init_weights(*x, a);
  init_weights(*y, b);
  auto px = x->parameters(), py = y->parameters();
  for (size_t i = 0; i < px.size(); ++i) EXPECT_TRUE(torch::equal(px[i], py[i]));
}

}  // namespace
}  // namespace swinmark::blocks
