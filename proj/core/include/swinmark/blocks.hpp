// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include <torch/nn/module.h>
#include <torch/nn/modules/container/modulelist.h>
#include <torch/nn/modules/conv.h>
#include <torch/nn/modules/linear.h>
#include <torch/nn/modules/normalization.h>
#include <torch/nn/pimpl.h>

#include "swinmark/rng.hpp"

namespace swinmark::blocks {

/// Window attention configuration. `shift` is 0 (W-MSA) or window/2 (SW-MSA).
struct AttentionParams {
  int64_t window = 4;
  int64_t shift = 0;
  int64_t heads = 4;

  void validate(int64_t dim, int64_t rows, int64_t cols) const;
};

/// Additive attention mask for the cyclically shifted window layout:
/// [num_windows, window^2, window^2], 0 where attention is allowed and -inf
/// between tokens that were not contiguous before the shift. All zeros when
/// shift == 0.
torch::Tensor shifted_window_mask(int64_t rows, int64_t cols, int64_t window, int64_t shift);

/// Multi-head self-attention restricted to non-overlapping windows of a token
/// grid, with a learned relative position bias per in-window offset.
class WindowAttentionImpl : public torch::nn::Module {
 public:
  WindowAttentionImpl(int64_t dim, AttentionParams params, int64_t rows, int64_t cols);

  /// tokens [B, rows * cols, D] in raster order -> same shape.
  torch::Tensor forward(const torch::Tensor& tokens);
  /// As forward; also returns the post-softmax weights
  /// [B * num_windows, heads, window^2, window^2] (shifted layout).
  std::pair<torch::Tensor, torch::Tensor> forward_with_weights(const torch::Tensor& tokens);

  [[nodiscard]] const AttentionParams& params() const { return params_; }

  torch::nn::Linear qkv{nullptr};
  torch::nn::Linear proj{nullptr};
  torch::Tensor position_bias_table;  // [(2w-1)^2, heads]

 private:
  AttentionParams params_;
  int64_t dim_, rows_, cols_;
  double scale_;
  torch::Tensor relative_index_;  // [w^2 * w^2]
  torch::Tensor mask_;            // [nW, w^2, w^2] or undefined
};
TORCH_MODULE(WindowAttention);

/// Plain multi-head self-attention over all tokens.
class GlobalAttentionImpl : public torch::nn::Module {
 public:
  GlobalAttentionImpl(int64_t dim, int64_t heads);
  torch::Tensor forward(const torch::Tensor& tokens);

  torch::nn::Linear qkv{nullptr};
  torch::nn::Linear proj{nullptr};

 private:
  int64_t dim_, heads_;
  double scale_;
};
TORCH_MODULE(GlobalAttention);

class MlpImpl : public torch::nn::Module {
 public:
  MlpImpl(int64_t dim, int64_t ratio);
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Linear fc1{nullptr};
  torch::nn::Linear fc2{nullptr};
};
TORCH_MODULE(Mlp);

/// One Swin block: x + attn(LN(x)), then y + MLP(LN(y)).
class SwinBlockImpl : public torch::nn::Module {
 public:
  SwinBlockImpl(int64_t dim, AttentionParams params, int64_t rows, int64_t cols, int64_t mlp_ratio);
  torch::Tensor forward(const torch::Tensor& tokens);

  torch::nn::LayerNorm norm1{nullptr};
  WindowAttention attn{nullptr};
  torch::nn::LayerNorm norm2{nullptr};
  Mlp mlp{nullptr};
};
TORCH_MODULE(SwinBlock);

/// W-MSA block followed by an SW-MSA block (shift = window / 2). The shift
/// is dropped when the grid is a single window wide.
class SwinPairImpl : public torch::nn::Module {
 public:
  SwinPairImpl(int64_t dim, int64_t heads, int64_t window, int64_t rows, int64_t cols,
               int64_t mlp_ratio);
  torch::Tensor forward(const torch::Tensor& tokens);

  SwinBlock regular{nullptr};
  SwinBlock shifted{nullptr};
};
TORCH_MODULE(SwinPair);

/// Local/channel bias path: tokens -> image -> 1x1 expand -> GELU -> 3x3
/// depthwise -> 1x1 reduce (X_channel); sigmoid(FC(avgpool)) (X_weight);
/// returns tokens(X_img + X_channel * X_weight).
class LocalChannelBlockImpl : public torch::nn::Module {
 public:
  LocalChannelBlockImpl(int64_t channels, int64_t expansion, int64_t patch, int64_t height,
                        int64_t width);
  torch::Tensor forward(const torch::Tensor& tokens);
  /// Channel gate X_weight [B, C] for the given tokens.
  torch::Tensor gate(const torch::Tensor& tokens);

  torch::nn::Conv2d expand{nullptr};
  torch::nn::Conv2d depthwise{nullptr};
  torch::nn::Conv2d reduce{nullptr};
  torch::nn::Linear fc{nullptr};

 private:
  torch::Tensor channel_features(const torch::Tensor& image);

  int64_t patch_, height_, width_;
};
TORCH_MODULE(LocalChannelBlock);

/// Swin pair optionally preceded by the local/channel enhancement block.
class LcestbImpl : public torch::nn::Module {
 public:
  struct Options {
    int64_t channels;  // feature-map channels C'
    int64_t height;    // feature-map side in pixels
    int64_t width;
    int64_t patch;
    int64_t heads;
    int64_t window;
    int64_t mlp_ratio = 4;
    int64_t expansion = 4;
    bool use_lceb = true;
  };
  explicit LcestbImpl(const Options& options);
  torch::Tensor forward(const torch::Tensor& tokens);

  LocalChannelBlock lce{nullptr};  // null when use_lceb is false
  SwinPair swin{nullptr};
};
TORCH_MODULE(Lcestb);

/// ViT block: x + MSA(LN(x)), then y + MLP(LN(y)).
class VitBlockImpl : public torch::nn::Module {
 public:
  VitBlockImpl(int64_t dim, int64_t heads, int64_t mlp_ratio);
  torch::Tensor forward(const torch::Tensor& tokens);

  torch::nn::LayerNorm norm1{nullptr};
  GlobalAttention attn{nullptr};
  torch::nn::LayerNorm norm2{nullptr};
  Mlp mlp{nullptr};
};
TORCH_MODULE(VitBlock);

/// Orthonormal DCT-II matrix [n, n] (row k = frequency k).
torch::Tensor dct_matrix(int64_t n, torch::Dtype dtype = torch::kFloat32);
/// DCT-II along the token axis of [B, N, D], independently per channel.
torch::Tensor dct_per_channel(const torch::Tensor& tokens);
/// Inverse of dct_per_channel.
torch::Tensor idct_per_channel(const torch::Tensor& coefficients);

/// Scales each channel by a gate computed from its DCT spectrum:
/// F_w = sigmoid(FC(mean_n |DCT(x)|)), output = x * F_w. Identity when disabled.
class FrequencyBlockImpl : public torch::nn::Module {
 public:
  FrequencyBlockImpl(int64_t dim, int64_t tokens, bool enabled);
  torch::Tensor forward(const torch::Tensor& tokens);
  /// F_w [B, D]; requires the block to be enabled.
  torch::Tensor gate(const torch::Tensor& tokens);

  [[nodiscard]] bool enabled() const { return enabled_; }

  torch::nn::Linear fc{nullptr};

 private:
  bool enabled_;
  torch::Tensor basis_;  // [N, N]
};
TORCH_MODULE(FrequencyBlock);

/// `depth` ViT blocks followed by one frequency block.
class FetbImpl : public torch::nn::Module {
 public:
  FetbImpl(int64_t dim, int64_t tokens, int64_t heads, int64_t depth, int64_t mlp_ratio,
           bool use_feb);
  torch::Tensor forward(const torch::Tensor& tokens);

  torch::nn::ModuleList vit;
  FrequencyBlock freq{nullptr};
};
TORCH_MODULE(Fetb);

/// Re-initialises every parameter of `module` from `rng`: truncated normal
/// (sigma 0.02, cut at 2 sigma) for linear layers, normal with std
/// 1/sqrt(fan_in) for (transposed) convolutions, zeros for biases and
/// position-bias tables, identity affine for LayerNorm.
void init_weights(torch::nn::Module& module, Rng& rng);

}  // namespace swinmark::blocks
