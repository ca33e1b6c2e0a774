// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/types.h>

namespace swinmark::objectives {

/// Weighted training objective. The tensors carry the graph; the doubles are
/// detached copies for logging.
struct LossBreakdown {
  torch::Tensor image;
  torch::Tensor message;
  torch::Tensor constraint;
  torch::Tensor total;

  [[nodiscard]] double image_value() const { return image.item<double>(); }
  [[nodiscard]] double message_value() const { return message.item<double>(); }
  [[nodiscard]] double constraint_value() const { return constraint.item<double>(); }
  [[nodiscard]] double total_value() const { return total.item<double>(); }
};

struct LossWeights {
  double image = 2.0;
  double message = 10.0;
  double constraint = 0.1;
};

/// Mean squared error between cover and watermarked images.
torch::Tensor image_loss(const torch::Tensor& cover, const torch::Tensor& watermarked);
/// Mean squared error between the embedded bits and the extracted values
/// (sigmoid probabilities during training).
torch::Tensor message_loss(const torch::Tensor& embedded, const torch::Tensor& extracted);
/// Half the distance by which each value leaves [0, 1], summed over the
/// spatial positions of each image plane and averaged over batch and
/// channels. [B, C, H, W] input.
torch::Tensor constraint_loss(const torch::Tensor& watermarked);
/// Combines precomputed components.
LossBreakdown total_loss(torch::Tensor image, torch::Tensor message, torch::Tensor constraint,
                         const LossWeights& weights);
/// Computes every component from the raw tensors; `logits` go through a
/// sigmoid before the message term.
LossBreakdown total_loss(const torch::Tensor& cover, const torch::Tensor& watermarked,
                         const torch::Tensor& message, const torch::Tensor& logits,
                         const LossWeights& weights);

/// Reported when the two images are identical.
inline constexpr double kPsnrCapDb = 100.0;

/// PSNR in dB over all elements jointly, peak value 1, computed in double.
double psnr(const torch::Tensor& a, const torch::Tensor& b);
/// Per-image PSNR [B] (double), each image's RGB values jointly.
torch::Tensor psnr_per_image(const torch::Tensor& a, const torch::Tensor& b);
/// Fraction of bits where (logit > 0) agrees with (bit > 0.5).
double bit_accuracy(const torch::Tensor& bits, const torch::Tensor& logits);

}  // namespace swinmark::objectives
