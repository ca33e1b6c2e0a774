// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#include "swinmark/layout.hpp"

#include <torch/torch.h>
#include <fmt/format.h>

#include "swinmark/errors.hpp"

namespace swinmark {

torch::Tensor patchify(const torch::Tensor& feature, int64_t patch) {
  if (feature.dim() != 4) throw ShapeError("patchify: expected [B, C, H, W]");
  if (patch <= 0) throw ShapeError("patchify: patch side must be positive");
  const auto b = feature.size(0), c = feature.size(1), h = feature.size(2), w = feature.size(3);
  if (h % patch != 0 || w % patch != 0) {
    throw ShapeError(fmt::format("patchify: {}x{} is not divisible by patch {}", h, w, patch));
  }
  const auto gh = h / patch, gw = w / patch;
  return feature.reshape({b, c, gh, patch, gw, patch})
      .permute({0, 2, 4, 1, 3, 5})
      .reshape({b, gh * gw, c * patch * patch});
}

torch::Tensor unpatchify(const torch::Tensor& tokens, int64_t patch, int64_t height, int64_t width) {
  if (tokens.dim() != 3) throw ShapeError("unpatchify: expected [B, N, D]");
  if (patch <= 0 || height % patch != 0 || width % patch != 0) {
    throw ShapeError(fmt::format("unpatchify: {}x{} is not divisible by patch {}", height, width, patch));
  }
  const auto gh = height / patch, gw = width / patch;
  const auto b = tokens.size(0), n = tokens.size(1), d = tokens.size(2);
  if (n != gh * gw) {
    throw ShapeError(fmt::format("unpatchify: {} tokens do not tile a {}x{} map with patch {}", n,
                                 height, width, patch));
  }
  if (d % (patch * patch) != 0) {
    throw ShapeError(fmt::format("unpatchify: token width {} not divisible by {}", d, patch * patch));
  }
  const auto c = d / (patch * patch);
  return tokens.reshape({b, gh, gw, c, patch, patch})
      .permute({0, 3, 1, 4, 2, 5})
      .reshape({b, c, height, width});
}

torch::Tensor window_partition(const torch::Tensor& grid, int64_t window) {
  if (grid.dim() != 4) throw ShapeError("window_partition: expected [B, h, w, D]");
  const auto b = grid.size(0), h = grid.size(1), w = grid.size(2), d = grid.size(3);
  if (window <= 0 || h % window != 0 || w % window != 0) {
    throw ShapeError(fmt::format("window_partition: grid {}x{} not divisible by window {}", h, w, window));
  }
  return grid.reshape({b, h / window, window, w / window, window, d})
      .permute({0, 1, 3, 2, 4, 5})
      .reshape({-1, window * window, d});
}

torch::Tensor window_reverse(const torch::Tensor& windows, int64_t window, int64_t rows,
                             int64_t cols) {
  if (windows.dim() != 3 || windows.size(1) != window * window) {
    throw ShapeError("window_reverse: expected [B * nW, window^2, D]");
  }
  if (rows % window != 0 || cols % window != 0) {
    throw ShapeError(fmt::format("window_reverse: grid {}x{} not divisible by window {}", rows, cols, window));
  }
  const auto per_image = (rows / window) * (cols / window);
  if (windows.size(0) % per_image != 0) throw ShapeError("window_reverse: window count mismatch");
  const auto b = windows.size(0) / per_image;
  const auto d = windows.size(2);
  return windows.reshape({b, rows / window, cols / window, window, window, d})
      .permute({0, 1, 3, 2, 4, 5})
      .reshape({b, rows, cols, d});
}

torch::Tensor nearest_resize(const torch::Tensor& x, int64_t rows, int64_t cols) {
  if (x.dim() != 4) throw ShapeError("nearest_resize: expected [B, C, h, w]");
  const auto h = x.size(2), w = x.size(3);
  if (h == rows && w == cols) return x;
  auto opts = torch::TensorOptions().dtype(torch::kLong).device(x.device());
  auto ri = torch::floor_divide(torch::arange(rows, opts) * h, rows);
  auto ci = torch::floor_divide(torch::arange(cols, opts) * w, cols);
  return x.index_select(2, ri).index_select(3, ci);
}

}  // namespace swinmark
