// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#include "swinmark/objectives.hpp"

#include <cmath>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <torch/torch.h>

#include "swinmark/errors.hpp"

namespace swinmark::objectives {
namespace {

void same_shape(const torch::Tensor& a, const torch::Tensor& b, const char* what) {
  if (a.sizes() != b.sizes()) {
    throw ShapeError(fmt::format("{}: shape mismatch [{}] vs [{}]", what, fmt::join(a.sizes(), ", "),
                                 fmt::join(b.sizes(), ", ")));
  }
}

double mse_to_db(double mse) {
  if (mse <= 0) return kPsnrCapDb;
  return std::min(kPsnrCapDb, 10.0 * std::log10(1.0 / mse));
}

}  // namespace

torch::Tensor image_loss(const torch::Tensor& cover, const torch::Tensor& watermarked) {
  same_shape(cover, watermarked, "image_loss");
  return (watermarked - cover).pow(2).mean();
}

torch::Tensor message_loss(const torch::Tensor& embedded, const torch::Tensor& extracted) {
  same_shape(embedded, extracted, "message_loss");
  return (extracted - embedded).pow(2).mean();
}

torch::Tensor constraint_loss(const torch::Tensor& watermarked) {
  if (watermarked.dim() != 4) throw ShapeError("constraint_loss: expected [B, C, H, W]");
  auto excess = torch::relu(watermarked - 1.0) + torch::relu(-watermarked);
  return 0.5 * excess.sum({2, 3}).mean();
}

LossBreakdown total_loss(torch::Tensor image, torch::Tensor message, torch::Tensor constraint,
                         const LossWeights& weights) {
  auto total = weights.image * image + weights.message * message + weights.constraint * constraint;
  return {std::move(image), std::move(message), std::move(constraint), std::move(total)};
}

LossBreakdown total_loss(const torch::Tensor& cover, const torch::Tensor& watermarked,
                         const torch::Tensor& message, const torch::Tensor& logits,
                         const LossWeights& weights) {
  return total_loss(image_loss(cover, watermarked), message_loss(message, torch::sigmoid(logits)),
                    constraint_loss(watermarked), weights);
}

double psnr(const torch::Tensor& a, const torch::Tensor& b) {
  same_shape(a, b, "psnr");
  auto diff = a.detach().to(torch::kFloat64) - b.detach().to(torch::kFloat64);
  return mse_to_db(diff.pow(2).mean().item<double>());
}

torch::Tensor psnr_per_image(const torch::Tensor& a, const torch::Tensor& b) {
  same_shape(a, b, "psnr");
  auto diff = a.detach().to(torch::kFloat64) - b.detach().to(torch::kFloat64);
  auto mse = diff.pow(2).flatten(1).mean(1);
  auto out = torch::empty({mse.size(0)}, torch::kFloat64);
  for (int64_t i = 0; i < mse.size(0); ++i) out[i] = mse_to_db(mse[i].item<double>());
  return out;
}

double bit_accuracy(const torch::Tensor& bits, const torch::Tensor& logits) {
  same_shape(bits, logits, "bit_accuracy");
  if (bits.numel() == 0) throw ShapeError("bit_accuracy: empty message");
  auto agree = (logits.detach() > 0) == (bits.detach() > 0.5);
  return agree.to(torch::kFloat64).mean().item<double>();
}

}  // namespace swinmark::objectives
