// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <torch/torch.h>

#include "swinmark/blocks.hpp"
#include "swinmark/errors.hpp"
#include "swinmark/layout.hpp"

namespace swinmark::blocks {

void AttentionParams::validate(int64_t dim, int64_t rows, int64_t cols) const {
  if (heads <= 0 || dim % heads != 0) {
    throw ShapeError(fmt::format("attention: heads {} must divide width {}", heads, dim));
  }
  if (window <= 0 || rows % window != 0 || cols % window != 0) {
    throw ShapeError(fmt::format("attention: grid {}x{} not divisible by window {}", rows, cols, window));
  }
  if (shift != 0 && shift != window / 2) {
    throw ShapeError(fmt::format("attention: shift must be 0 or {}, got {}", window / 2, shift));
  }
}

torch::Tensor shifted_window_mask(int64_t rows, int64_t cols, int64_t window, int64_t shift) {
  const int64_t tokens = window * window;
  const int64_t windows = (rows / window) * (cols / window);
  if (shift == 0) return torch::zeros({windows, tokens, tokens});

  // Label each region of the rolled grid: along each axis the last window is
  // split where the wrapped-around tokens begin.
  auto region = torch::zeros({1, rows, cols, 1});
  const int64_t row_cuts[] = {0, rows - window, rows - shift, rows};
  const int64_t col_cuts[] = {0, cols - window, cols - shift, cols};
  float label = 0;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      using torch::indexing::Slice;
      region.index_put_({0, Slice(row_cuts[r], row_cuts[r + 1]), Slice(col_cuts[c], col_cuts[c + 1]), 0},
                        label);
      label += 1;
    }
  }
  auto ids = window_partition(region, window).squeeze(-1);  // [nW, T]
  auto differs = ids.unsqueeze(1) != ids.unsqueeze(2);
  return torch::zeros({windows, tokens, tokens})
      .masked_fill(differs, -std::numeric_limits<float>::infinity());
}

WindowAttentionImpl::WindowAttentionImpl(int64_t dim, AttentionParams params, int64_t rows,
                                         int64_t cols)
    : params_(params),
      dim_(dim),
      rows_(rows),
      cols_(cols),
      scale_(1.0 / std::sqrt(static_cast<double>(dim / params.heads))) {
  params_.validate(dim, rows, cols);
  qkv = register_module("qkv", torch::nn::Linear(dim, 3 * dim));
  proj = register_module("proj", torch::nn::Linear(dim, dim));

  const int64_t w = params_.window;
  position_bias_table =
      register_parameter("position_bias_table", torch::zeros({(2 * w - 1) * (2 * w - 1), params_.heads}));

  auto coords = torch::arange(w);
  auto grid = torch::meshgrid({coords, coords}, "ij");
  auto flat = torch::stack({grid[0].flatten(), grid[1].flatten()});  // [2, T]
  auto rel = flat.unsqueeze(2) - flat.unsqueeze(1);                  // [2, T, T]
  auto index = (rel[0] + (w - 1)) * (2 * w - 1) + (rel[1] + (w - 1));
  relative_index_ = register_buffer("relative_index", index.flatten().to(torch::kLong));

  if (params_.shift > 0) {
    mask_ = register_buffer("shift_mask", shifted_window_mask(rows, cols, w, params_.shift));
  }
}

std::pair<torch::Tensor, torch::Tensor> WindowAttentionImpl::forward_with_weights(
    const torch::Tensor& tokens) {
  if (tokens.dim() != 3 || tokens.size(1) != rows_ * cols_ || tokens.size(2) != dim_) {
    throw ShapeError(fmt::format("window attention: expected [B, {}, {}], got {}", rows_ * cols_, dim_,
                                 fmt::join(tokens.sizes(), "x")));
  }
  const int64_t batch = tokens.size(0);
  const int64_t w = params_.window, s = params_.shift, heads = params_.heads;
  const int64_t t = w * w, head_dim = dim_ / heads;

  auto x = tokens.reshape({batch, rows_, cols_, dim_});
  if (s > 0) x = torch::roll(x, {-s, -s}, {1, 2});
  auto windows = window_partition(x, w);  // [B * nW, T, D]
  const int64_t bw = windows.size(0);

  auto qkv_out = qkv(windows).reshape({bw, t, 3, heads, head_dim}).permute({2, 0, 3, 1, 4});
  auto q = qkv_out[0] * scale_;
  auto k = qkv_out[1];
  auto v = qkv_out[2];

  auto scores = torch::matmul(q, k.transpose(-2, -1));  // [B * nW, heads, T, T]
  auto bias = position_bias_table.index_select(0, relative_index_).reshape({t, t, heads}).permute({2, 0, 1});
  scores = scores + bias.unsqueeze(0);
  if (mask_.defined()) {
    const int64_t nw = mask_.size(0);
    scores = (scores.reshape({batch, nw, heads, t, t}) + mask_.unsqueeze(1).unsqueeze(0))
                 .reshape({bw, heads, t, t});
  }
  auto weights = torch::softmax(scores, -1);
  auto out = torch::matmul(weights, v).transpose(1, 2).reshape({bw, t, dim_});
  out = proj(out);

  auto merged = window_reverse(out, w, rows_, cols_);
  if (s > 0) merged = torch::roll(merged, {s, s}, {1, 2});
  return {merged.reshape({batch, rows_ * cols_, dim_}), weights};
}

torch::Tensor WindowAttentionImpl::forward(const torch::Tensor& tokens) {
  return forward_with_weights(tokens).first;
}

GlobalAttentionImpl::GlobalAttentionImpl(int64_t dim, int64_t heads)
    : dim_(dim), heads_(heads), scale_(1.0 / std::sqrt(static_cast<double>(dim / heads))) {
  if (heads <= 0 || dim % heads != 0) {
    throw ShapeError(fmt::format("attention: heads {} must divide width {}", heads, dim));
  }
  qkv = register_module("qkv", torch::nn::Linear(dim, 3 * dim));
  proj = register_module("proj", torch::nn::Linear(dim, dim));
}

torch::Tensor GlobalAttentionImpl::forward(const torch::Tensor& tokens) {
  if (tokens.dim() != 3 || tokens.size(2) != dim_) {
    throw ShapeError(fmt::format("attention: expected [B, N, {}]", dim_));
  }
  const int64_t b = tokens.size(0), n = tokens.size(1), hd = dim_ / heads_;
  auto qkv_out = qkv(tokens).reshape({b, n, 3, heads_, hd}).permute({2, 0, 3, 1, 4});
  auto scores = torch::matmul(qkv_out[0] * scale_, qkv_out[1].transpose(-2, -1));
  auto out = torch::matmul(torch::softmax(scores, -1), qkv_out[2]);
  return proj(out.transpose(1, 2).reshape({b, n, dim_}));
}

}  // namespace swinmark::blocks
