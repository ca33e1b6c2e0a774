// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#include "swinmark/blocks.hpp"

#include <cmath>

#include <fmt/format.h>
#include <torch/torch.h>

#include "swinmark/errors.hpp"
#include "swinmark/layout.hpp"

namespace swinmark::blocks {
namespace {

torch::nn::LayerNorm layer_norm(int64_t dim) {
  return torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim}).eps(1e-5));
}

}  // namespace

MlpImpl::MlpImpl(int64_t dim, int64_t ratio) {
  fc1 = register_module("fc1", torch::nn::Linear(dim, dim * ratio));
  fc2 = register_module("fc2", torch::nn::Linear(dim * ratio, dim));
}

torch::Tensor MlpImpl::forward(const torch::Tensor& x) { return fc2(torch::gelu(fc1(x))); }

SwinBlockImpl::SwinBlockImpl(int64_t dim, AttentionParams params, int64_t rows, int64_t cols,
                             int64_t mlp_ratio) {
  norm1 = register_module("norm1", layer_norm(dim));
  attn = register_module("attn", WindowAttention(dim, params, rows, cols));
  norm2 = register_module("norm2", layer_norm(dim));
  mlp = register_module("mlp", Mlp(dim, mlp_ratio));
}

torch::Tensor SwinBlockImpl::forward(const torch::Tensor& tokens) {
  auto x = tokens + attn(norm1(tokens));
  return x + mlp(norm2(x));
}

SwinPairImpl::SwinPairImpl(int64_t dim, int64_t heads, int64_t window, int64_t rows, int64_t cols,
                           int64_t mlp_ratio) {
  const int64_t shift = std::min(rows, cols) > window ? window / 2 : 0;
  regular = register_module("regular", SwinBlock(dim, AttentionParams{window, 0, heads}, rows, cols, mlp_ratio));
  shifted = register_module("shifted", SwinBlock(dim, AttentionParams{window, shift, heads}, rows, cols, mlp_ratio));
}

torch::Tensor SwinPairImpl::forward(const torch::Tensor& tokens) { return shifted(regular(tokens)); }

LocalChannelBlockImpl::LocalChannelBlockImpl(int64_t channels, int64_t expansion, int64_t patch,
                                             int64_t height, int64_t width)
    : patch_(patch), height_(height), width_(width) {
  const int64_t hidden = channels * expansion;
  expand = register_module("expand", torch::nn::Conv2d(torch::nn::Conv2dOptions(channels, hidden, 1)));
  depthwise = register_module(
      "depthwise", torch::nn::Conv2d(torch::nn::Conv2dOptions(hidden, hidden, 3).padding(1).groups(hidden)));
  reduce = register_module("reduce", torch::nn::Conv2d(torch::nn::Conv2dOptions(hidden, channels, 1)));
  fc = register_module("fc", torch::nn::Linear(channels, channels));
}

torch::Tensor LocalChannelBlockImpl::channel_features(const torch::Tensor& image) {
  return reduce(depthwise(torch::gelu(expand(image))));
}

torch::Tensor LocalChannelBlockImpl::gate(const torch::Tensor& tokens) {
  auto features = channel_features(unpatchify(tokens, patch_, height_, width_));
  return torch::sigmoid(fc(features.mean({2, 3})));
}

torch::Tensor LocalChannelBlockImpl::forward(const torch::Tensor& tokens) {
  auto image = unpatchify(tokens, patch_, height_, width_);
  auto features = channel_features(image);
  auto weight = torch::sigmoid(fc(features.mean({2, 3})));
  auto bias = features * weight.unsqueeze(-1).unsqueeze(-1);
  return patchify(image + bias, patch_);
}

LcestbImpl::LcestbImpl(const Options& o) {
  const int64_t rows = o.height / o.patch, cols = o.width / o.patch;
  const int64_t dim = o.channels * o.patch * o.patch;
  if (o.use_lceb) {
    lce = register_module("lce", LocalChannelBlock(o.channels, o.expansion, o.patch, o.height, o.width));
  }
  swin = register_module("swin", SwinPair(dim, o.heads, o.window, rows, cols, o.mlp_ratio));
}

torch::Tensor LcestbImpl::forward(const torch::Tensor& tokens) {
  if (lce) return swin(lce(tokens));
  return swin(tokens);
}

VitBlockImpl::VitBlockImpl(int64_t dim, int64_t heads, int64_t mlp_ratio) {
  norm1 = register_module("norm1", layer_norm(dim));
  attn = register_module("attn", GlobalAttention(dim, heads));
  norm2 = register_module("norm2", layer_norm(dim));
  mlp = register_module("mlp", Mlp(dim, mlp_ratio));
}

torch::Tensor VitBlockImpl::forward(const torch::Tensor& tokens) {
  auto x = tokens + attn(norm1(tokens));
  return x + mlp(norm2(x));
}

FrequencyBlockImpl::FrequencyBlockImpl(int64_t dim, int64_t tokens, bool enabled) : enabled_(enabled) {
  if (enabled_) {
    fc = register_module("fc", torch::nn::Linear(dim, dim));
    basis_ = register_buffer("dct_basis", dct_matrix(tokens));
  }
}

torch::Tensor FrequencyBlockImpl::gate(const torch::Tensor& tokens) {
  if (!enabled_) throw std::logic_error("frequency block is disabled");
  if (tokens.dim() != 3 || tokens.size(1) != basis_.size(0)) {
    throw ShapeError(fmt::format("frequency block: expected {} tokens", basis_.size(0)));
  }
  auto spectrum = torch::matmul(basis_, tokens);  // [B, N, D]
  return torch::sigmoid(fc(spectrum.abs().mean(1)));
}

torch::Tensor FrequencyBlockImpl::forward(const torch::Tensor& tokens) {
  if (!enabled_) return tokens;
  return tokens * gate(tokens).unsqueeze(1);
}

FetbImpl::FetbImpl(int64_t dim, int64_t tokens, int64_t heads, int64_t depth, int64_t mlp_ratio,
                   bool use_feb) {
  vit = register_module("vit", torch::nn::ModuleList());
  for (int64_t i = 0; i < depth; ++i) vit->push_back(VitBlock(dim, heads, mlp_ratio));
  freq = register_module("freq", FrequencyBlock(dim, tokens, use_feb));
}

torch::Tensor FetbImpl::forward(const torch::Tensor& tokens) {
  auto x = tokens;
  for (const auto& block : *vit) x = block->as<VitBlockImpl>()->forward(x);
  return freq(x);
}

void init_weights(torch::nn::Module& module, Rng& rng) {
  torch::NoGradGuard no_grad;
  auto& gen = rng.generator();
  auto init_one = [&gen](torch::nn::Module& m) {
    if (auto* linear = m.as<torch::nn::LinearImpl>()) {
      // truncated normal by inverse-CDF sampling of the clipped range
      constexpr double sigma = 0.02;
      const double lo = 0.5 * (1.0 + std::erf(-2.0 / std::sqrt(2.0)));
      const double hi = 0.5 * (1.0 + std::erf(2.0 / std::sqrt(2.0)));
      auto u = torch::empty_like(linear->weight).uniform_(2 * lo - 1, 2 * hi - 1, gen);
      linear->weight.copy_(u.erfinv_().mul_(sigma * std::sqrt(2.0)).clamp_(-2 * sigma, 2 * sigma));
      if (linear->bias.defined()) linear->bias.zero_();
    } else if (auto* conv = m.as<torch::nn::Conv2dImpl>()) {
      const auto fan_in = conv->weight.size(1) * conv->weight.size(2) * conv->weight.size(3);
      conv->weight.normal_(0.0, 1.0 / std::sqrt(static_cast<double>(fan_in)), gen);
      if (conv->bias.defined()) conv->bias.zero_();
    } else if (auto* tconv = m.as<torch::nn::ConvTranspose2dImpl>()) {
      // weight is [in, out, kh, kw]; with stride == kernel each output sees `in` taps
      const auto fan_in = tconv->weight.size(0);
      tconv->weight.normal_(0.0, 1.0 / std::sqrt(static_cast<double>(fan_in)), gen);
      if (tconv->bias.defined()) tconv->bias.zero_();
    } else if (auto* norm = m.as<torch::nn::LayerNormImpl>()) {
      norm->weight.fill_(1.0);
      norm->bias.zero_();
    } else if (auto* attn = m.as<WindowAttentionImpl>()) {
      attn->position_bias_table.zero_();
    }
  };
  init_one(module);
  for (const auto& child : module.modules(/*include_self=*/false)) init_one(*child);
}

}  // namespace swinmark::blocks
