// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#include "swinmark/networks.hpp"

#include <fmt/format.h>
#include <torch/torch.h>

#include "swinmark/errors.hpp"
#include "swinmark/layout.hpp"

namespace swinmark::nets {
namespace {

torch::nn::Conv2d conv3x3(int64_t in, int64_t out) {
  return torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, 3).padding(1));
}

blocks::Lcestb make_lcestb(const ExperimentConfig& c, int64_t channels, int64_t stage) {
  blocks::LcestbImpl::Options o{};
  o.channels = channels;
  o.height = c.height >> stage;
  o.width = c.width >> stage;
  o.patch = c.patch;
  o.heads = c.heads;
  o.window = c.window;
  o.mlp_ratio = c.mlp_ratio;
  o.expansion = c.lce_expansion;
  o.use_lceb = c.use_lceb;
  return blocks::Lcestb(o);
}

blocks::Fetb make_fetb(const ExperimentConfig& c) {
  const int64_t k = c.stages;
  const int64_t dim = c.patch * c.patch * c.stage_channels(k);
  const int64_t tokens = c.grid_rows(k) * c.grid_cols(k);
  return blocks::Fetb(dim, tokens, c.heads, c.fetb_depth, c.mlp_ratio, c.use_feb);
}

void check_image(const torch::Tensor& x, const ExperimentConfig& c, const char* who) {
  if (x.dim() != 4 || x.size(1) != 3 || x.size(2) != c.height || x.size(3) != c.width) {
    throw ShapeError(fmt::format("{}: expected [B, 3, {}, {}] image", who, c.height, c.width));
  }
}

// tokens -> block -> feature map at the given stage resolution
torch::Tensor run_lcestb(torch::nn::Module& block, const torch::Tensor& feature, int64_t patch) {
  auto tokens = block.as<blocks::LcestbImpl>()->forward(patchify(feature, patch));
  return unpatchify(tokens, patch, feature.size(2), feature.size(3));
}

}  // namespace

MessageDiffusionImpl::MessageDiffusionImpl(int64_t bits, int64_t side, int64_t out_channels)
    : side_(side) {
  linear = register_module("linear", torch::nn::Linear(bits, side * side));
  conv = register_module("conv", conv3x3(1, out_channels));
}

torch::Tensor MessageDiffusionImpl::forward(const torch::Tensor& message, int64_t rows, int64_t cols) {
  if (message.dim() != 2 || message.size(1) != linear->weight.size(1)) {
    throw ShapeError(fmt::format("message diffusion: expected [B, {}] message", linear->weight.size(1)));
  }
  auto square = linear(message).reshape({message.size(0), 1, side_, side_});
  return conv(nearest_resize(square, rows, cols));
}

EncoderImpl::EncoderImpl(const ExperimentConfig& config) : config_(config) {
  config_.validate();
  const auto& c = config_;
  const int64_t k = c.stages;
  stem = register_module("stem", conv3x3(3, c.channels));
  down_blocks = register_module("down_blocks", torch::nn::ModuleList());
  downsamplers = register_module("downsamplers", torch::nn::ModuleList());
  for (int64_t s = 0; s < k; ++s) {
    const int64_t ch = c.stage_channels(s);
    down_blocks->push_back(make_lcestb(c, ch, s));
    downsamplers->push_back(torch::nn::Conv2d(torch::nn::Conv2dOptions(ch, 2 * ch, 4).stride(2).padding(1)));
  }
  bottleneck = register_module("bottleneck", make_fetb(c));

  upsamplers = register_module("upsamplers", torch::nn::ModuleList());
  diffusions = register_module("diffusions", torch::nn::ModuleList());
  up_blocks = register_module("up_blocks", torch::nn::ModuleList());
  projections = register_module("projections", torch::nn::ModuleList());
  for (int64_t s = k - 1; s >= 0; --s) {
    const int64_t ch = c.stage_channels(s);
    upsamplers->push_back(
        torch::nn::ConvTranspose2d(torch::nn::ConvTranspose2dOptions(2 * ch, ch, 2).stride(2)));
    diffusions->push_back(MessageDiffusion(c.message_bits, c.diffusion_side, c.message_channels));
    up_blocks->push_back(make_lcestb(c, 2 * ch + c.message_channels, s));
    if (s > 0) {
      projections->push_back(torch::nn::Conv2d(torch::nn::Conv2dOptions(2 * ch + c.message_channels, ch, 1)));
    }
  }
  head = register_module("head", conv3x3(2 * c.channels + c.message_channels, 3));
  skip_enabled_.assign(static_cast<size_t>(k), true);
}

void EncoderImpl::set_skip_enabled(int64_t stage, bool enabled) {
  skip_enabled_.at(static_cast<size_t>(stage)) = enabled;
}

torch::Tensor EncoderImpl::forward(const torch::Tensor& cover, const torch::Tensor& message) {
  const auto& c = config_;
  check_image(cover, c, "encode");
  if (message.dim() != 2 || message.size(0) != cover.size(0) || message.size(1) != c.message_bits) {
    throw ShapeError(fmt::format("encode: expected message [{}, {}]", cover.size(0), c.message_bits));
  }
  const int64_t k = c.stages;

  std::vector<torch::Tensor> skips;
  auto x = stem(cover);
  for (int64_t s = 0; s < k; ++s) {
    auto feature = run_lcestb(*down_blocks[s], x, c.patch);
    skips.push_back(feature);
    x = downsamplers[s]->as<torch::nn::Conv2dImpl>()->forward(feature);
  }
  x = unpatchify(bottleneck(patchify(x, c.patch)), c.patch, x.size(2), x.size(3));

  for (int64_t j = 0; j < k; ++j) {
    const int64_t s = k - 1 - j;
    x = upsamplers[j]->as<torch::nn::ConvTranspose2dImpl>()->forward(x);
    auto msg = diffusions[j]->as<MessageDiffusionImpl>()->forward(message, x.size(2), x.size(3));
    const auto& skip = skips[static_cast<size_t>(s)];
    auto merged = torch::cat({x, skip_enabled_[static_cast<size_t>(s)] ? skip : torch::zeros_like(skip), msg}, 1);
    x = run_lcestb(*up_blocks[j], merged, c.patch);
    if (s > 0) x = projections[j]->as<torch::nn::Conv2dImpl>()->forward(x);
  }
  return head(x);
}

DecoderImpl::DecoderImpl(const ExperimentConfig& config) : config_(config) {
  config_.validate();
  const auto& c = config_;
  stem = register_module("stem", conv3x3(3, c.channels));
  down_blocks = register_module("down_blocks", torch::nn::ModuleList());
  downsamplers = register_module("downsamplers", torch::nn::ModuleList());
  for (int64_t s = 0; s < c.stages; ++s) {
    const int64_t ch = c.stage_channels(s);
    down_blocks->push_back(make_lcestb(c, ch, s));
    downsamplers->push_back(torch::nn::Conv2d(torch::nn::Conv2dOptions(ch, 2 * ch, 4).stride(2).padding(1)));
  }
  bottleneck = register_module("bottleneck", make_fetb(c));
  head_conv = register_module("head_conv", conv3x3(c.stage_channels(c.stages), 1));
  const int64_t cells = (c.height >> c.stages) * (c.width >> c.stages);
  head_fc = register_module("head_fc", torch::nn::Linear(cells, c.message_bits));
}

torch::Tensor DecoderImpl::features(const torch::Tensor& noised) {
  const auto& c = config_;
  check_image(noised, c, "decode");
  auto x = stem(noised);
  for (int64_t s = 0; s < c.stages; ++s) {
    x = downsamplers[s]->as<torch::nn::Conv2dImpl>()->forward(run_lcestb(*down_blocks[s], x, c.patch));
  }
  return unpatchify(bottleneck(patchify(x, c.patch)), c.patch, x.size(2), x.size(3));
}

torch::Tensor DecoderImpl::forward(const torch::Tensor& noised) {
  return head_fc(head_conv(features(noised)).flatten(1));
}

WatermarkModelImpl::WatermarkModelImpl(const ExperimentConfig& config, Rng& rng) : config_(config) {
  config_.validate();
  encoder = register_module("encoder", Encoder(config_));
  decoder = register_module("decoder", Decoder(config_));
  blocks::init_weights(*this, rng);
}

torch::Tensor WatermarkModelImpl::encode(const torch::Tensor& cover, const torch::Tensor& message) {
  return encoder(cover, message);
}

torch::Tensor WatermarkModelImpl::decode(const torch::Tensor& noised) { return decoder(noised); }

int64_t count_parameters(const torch::nn::Module& module) {
  int64_t total = 0;
  for (const auto& p : module.parameters()) total += p.numel();
  return total;
}

torch::Tensor logits_to_bits(const torch::Tensor& logits) {
  return (torch::sigmoid(logits) > 0.5).to(torch::kFloat32);
}

}  // namespace swinmark::nets
