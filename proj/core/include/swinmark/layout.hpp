// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include <torch/types.h>

namespace swinmark {

/// Splits a feature map [B, C, H, W] into non-overlapping P x P patches and
/// flattens them into tokens [B, (H/P)*(W/P), P*P*C].
///
/// Tokens are in raster order over the patch grid. Within a token the
/// feature index is c*P*P + py*P + px, so P == 1 yields row-major pixels
/// with channels as features. Throws ShapeError unless P divides H and W.
torch::Tensor patchify(const torch::Tensor& feature, int64_t patch);

/// Exact inverse of patchify. Throws ShapeError when the token count or
/// width does not match (H, W, P).
torch::Tensor unpatchify(const torch::Tensor& tokens, int64_t patch, int64_t height, int64_t width);

/// Regroups a token grid [B, h, w, D] into windows [B * nW, window^2, D].
/// Windows are enumerated in raster order over the window grid, and tokens in
/// raster order inside each window.
torch::Tensor window_partition(const torch::Tensor& grid, int64_t window);

/// Inverse of window_partition back to [B, h, w, D].
torch::Tensor window_reverse(const torch::Tensor& windows, int64_t window, int64_t rows,
                             int64_t cols);

/// Nearest-neighbour resize of [B, C, h, w] to [B, C, rows, cols] using the
/// source index floor(i * h / rows).
torch::Tensor nearest_resize(const torch::Tensor& x, int64_t rows, int64_t cols);

}  // namespace swinmark
