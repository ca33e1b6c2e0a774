// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#include <array>

#include <fmt/format.h>
#include <torch/torch.h>

#include "swinmark/blocks.hpp"
#include "swinmark/errors.hpp"
#include "swinmark/noise.hpp"

namespace swinmark::noise {
namespace F = torch::nn::functional;
namespace {

constexpr std::array<float, 64> kLuma = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

constexpr std::array<float, 64> kChroma = {
    17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99};

torch::Tensor scaled_table(const std::array<float, 64>& base, int64_t quality) {
  const int64_t factor = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  auto t = torch::empty({8, 8}, torch::kFloat32);
  auto acc = t.accessor<float, 2>();
  for (int64_t i = 0; i < 64; ++i) {
    const auto v = (static_cast<int64_t>(base[i]) * factor + 50) / 100;
    acc[i / 8][i % 8] = static_cast<float>(std::clamp<int64_t>(v, 1, 255));
  }
  return t;
}

// Rows of the JFIF RGB -> YCbCr matrix (offsets applied separately).
torch::Tensor rgb_to_ycbcr_matrix() {
  return torch::tensor({0.299, 0.587, 0.114, -0.168736, -0.331264, 0.5, 0.5, -0.418688, -0.081312},
                       torch::kFloat64)
      .view({3, 3});
}

torch::Tensor color_mix(const torch::Tensor& x, const torch::Tensor& matrix) {
  return torch::einsum("oc,bchw->bohw", {matrix.to(x.options().requires_grad(false)), x});
}

void require_blocks(const torch::Tensor& x) {
  if (x.dim() != 4 || x.size(2) % 8 != 0 || x.size(3) % 8 != 0) {
    throw ShapeError("block transform: expected [B, C, H, W] with H and W multiples of 8");
  }
}

torch::Tensor blockwise(const torch::Tensor& x, bool inverse) {
  require_blocks(x);
  const auto b = x.size(0), c = x.size(1), h = x.size(2), w = x.size(3);
  auto d = blocks::dct_matrix(8, x.scalar_type()).to(x.device());
  if (inverse) d = d.t();
  auto tiles = x.reshape({b, c, h / 8, 8, w / 8, 8});
  // rows: D X ; cols: X D^T
  auto y = torch::einsum("ij,bcpjqk,lk->bcpiql", {d, tiles, d});
  return y.reshape({b, c, h, w});
}

}  // namespace

std::pair<torch::Tensor, torch::Tensor> jpeg_quant_tables(int64_t quality) {
  if (quality < 1 || quality > 100) {
    throw std::invalid_argument(fmt::format("jpeg: quality must be in [1, 100], got {}", quality));
  }
  return {scaled_table(kLuma, quality), scaled_table(kChroma, quality)};
}

torch::Tensor block_dct(const torch::Tensor& x) { return blockwise(x, false); }
torch::Tensor block_idct(const torch::Tensor& x) { return blockwise(x, true); }

torch::Tensor jpeg_sim(const torch::Tensor& x, int64_t quality, QuantizationTape* tape) {
  auto [luma, chroma] = jpeg_quant_tables(quality);
  if (x.dim() != 4 || x.size(1) != 3) throw ShapeError("jpeg: expected [B, 3, H, W]");
  const auto h = x.size(2), w = x.size(3);
  const auto pad_h = (8 - h % 8) % 8, pad_w = (8 - w % 8) % 8;

  auto forward = rgb_to_ycbcr_matrix();
  auto ycc = color_mix(x * 255.0, forward);
  ycc = ycc - torch::tensor({128.0, 0.0, 0.0}, ycc.options().requires_grad(false)).view({1, 3, 1, 1});
  if (pad_h || pad_w) ycc = F::pad(ycc, F::PadFuncOptions({0, pad_w, 0, pad_h}).mode(torch::kReplicate));

  const auto ph = ycc.size(2), pw = ycc.size(3);
  auto table = torch::stack({luma, chroma, chroma}).to(ycc.options().requires_grad(false));
  table = table.view({1, 3, 1, 8, 1, 8}).expand({1, 3, ph / 8, 8, pw / 8, 8}).reshape({1, 3, ph, pw});

  auto scaled = block_dct(ycc) / table;
  torch::Tensor residual;
  if (tape != nullptr && tape->replay) {
    if (tape->cursor >= tape->residuals.size()) throw std::logic_error("jpeg: quantization tape exhausted");
    residual = tape->residuals[tape->cursor++];
  } else {
    residual = (torch::round(scaled) - scaled).detach();
    if (tape != nullptr) tape->residuals.push_back(residual);
  }
  auto restored = block_idct((scaled + residual) * table);
  if (pad_h || pad_w) restored = restored.slice(2, 0, h).slice(3, 0, w);

  restored = restored + torch::tensor({128.0, 0.0, 0.0}, restored.options().requires_grad(false)).view({1, 3, 1, 1});
  auto backward = torch::linalg_inv(forward);
  return color_mix(restored, backward) / 255.0;
}

}  // namespace swinmark::noise
