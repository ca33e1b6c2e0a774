// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <torch/nn/module.h>
#include <torch/nn/modules/container/modulelist.h>
#include <torch/nn/modules/conv.h>
#include <torch/nn/modules/linear.h>
#include <torch/nn/pimpl.h>
#include <torch/optim/optimizer.h>

#include "swinmark/blocks.hpp"
#include "swinmark/config.hpp"
#include "swinmark/rng.hpp"

namespace swinmark::nets {

/// Message diffusion: linear L -> L1, reshape to L2 x L2, nearest resize to
/// the target grid, 3x3 conv to C1 channels.
class MessageDiffusionImpl : public torch::nn::Module {
 public:
  MessageDiffusionImpl(int64_t bits, int64_t side, int64_t out_channels);
  /// message [B, L] -> [B, C1, rows, cols]
  torch::Tensor forward(const torch::Tensor& message, int64_t rows, int64_t cols);

  torch::nn::Linear linear{nullptr};
  torch::nn::Conv2d conv{nullptr};

 private:
  int64_t side_;
};
TORCH_MODULE(MessageDiffusion);

/// U-shaped, message-conditioned encoder: cover [B, 3, H, W] and message
/// [B, L] -> watermarked image [B, 3, H, W] (unclamped).
class EncoderImpl : public torch::nn::Module {
 public:
  explicit EncoderImpl(const ExperimentConfig& config);
  torch::Tensor forward(const torch::Tensor& cover, const torch::Tensor& message);

  /// Replaces the skip feature of down stage `stage` with zeros in the
  /// concatenation; used to probe the skip wiring.
  void set_skip_enabled(int64_t stage, bool enabled);

  torch::nn::Conv2d stem{nullptr};
  torch::nn::ModuleList down_blocks;    // K x Lcestb
  torch::nn::ModuleList downsamplers;   // K x Conv2d(4, stride 2)
  blocks::Fetb bottleneck{nullptr};
  torch::nn::ModuleList upsamplers;     // K x ConvTranspose2d(2, stride 2), coarse to fine
  torch::nn::ModuleList diffusions;     // K x MessageDiffusion, coarse to fine
  torch::nn::ModuleList up_blocks;      // K x Lcestb, coarse to fine
  torch::nn::ModuleList projections;    // K-1 x Conv2d(1x1) between up stages
  torch::nn::Conv2d head{nullptr};

 private:
  ExperimentConfig config_;
  std::vector<bool> skip_enabled_;
};
TORCH_MODULE(Encoder);

/// Pyramid decoder: noised image [B, 3, H, W] -> message logits [B, L].
class DecoderImpl : public torch::nn::Module {
 public:
  explicit DecoderImpl(const ExperimentConfig& config);
  torch::Tensor forward(const torch::Tensor& noised);
  /// Bottleneck feature map [B, 2^K C, H / 2^K, W / 2^K] before the head.
  torch::Tensor features(const torch::Tensor& noised);

  torch::nn::Conv2d stem{nullptr};
  torch::nn::ModuleList down_blocks;
  torch::nn::ModuleList downsamplers;
  blocks::Fetb bottleneck{nullptr};
  torch::nn::Conv2d head_conv{nullptr};
  torch::nn::Linear head_fc{nullptr};

 private:
  ExperimentConfig config_;
};
TORCH_MODULE(Decoder);

/// Encoder and decoder built from one config and initialised from one seed.
class WatermarkModelImpl : public torch::nn::Module {
 public:
  WatermarkModelImpl(const ExperimentConfig& config, Rng& rng);

  torch::Tensor encode(const torch::Tensor& cover, const torch::Tensor& message);
  torch::Tensor decode(const torch::Tensor& noised);

  [[nodiscard]] const ExperimentConfig& config() const { return config_; }

  Encoder encoder{nullptr};
  Decoder decoder{nullptr};

 private:
  ExperimentConfig config_;
};
TORCH_MODULE(WatermarkModel);

/// Total number of scalar parameters.
int64_t count_parameters(const torch::nn::Module& module);

/// Extracted bits from decoder logits: sigmoid(logit) > 0.5.
torch::Tensor logits_to_bits(const torch::Tensor& logits);

/// Everything needed to resume training or run inference.
struct Checkpoint {
  ExperimentConfig config;
  int64_t step = 0;
  std::optional<torch::Tensor> rng_state;
  std::string distortion;
};

/// Writes config echo, step, rng state and named parameters into one archive.
/// The optimizer state is included when `optimizer` is non-null.
void save_checkpoint(const std::filesystem::path& path, WatermarkModel& model,
                     const Checkpoint& meta, torch::optim::Optimizer* optimizer = nullptr);

/// Reads the metadata only.
Checkpoint read_checkpoint_meta(const std::filesystem::path& path);

/// Loads parameters (and, when non-null, optimizer state) into `model`.
/// Throws ConfigError when the archive's architecture differs from the
/// model's config.
Checkpoint load_checkpoint(const std::filesystem::path& path, WatermarkModel& model,
                           torch::optim::Optimizer* optimizer = nullptr);

/// Builds a model from the config stored in the checkpoint and loads it.
std::pair<WatermarkModel, Checkpoint> load_model(const std::filesystem::path& path);

}  // namespace swinmark::nets
