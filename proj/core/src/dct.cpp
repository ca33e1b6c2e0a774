// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>

#include <torch/torch.h>

#include "swinmark/blocks.hpp"
#include "swinmark/errors.hpp"

namespace swinmark::blocks {

torch::Tensor dct_matrix(int64_t n, torch::Dtype dtype) {
  if (n <= 0) throw ShapeError("dct_matrix: size must be positive");
  auto k = torch::arange(n, torch::kFloat64).unsqueeze(1);
  auto i = torch::arange(n, torch::kFloat64).unsqueeze(0);
  auto basis = torch::cos(std::numbers::pi * (2.0 * i + 1.0) * k / (2.0 * static_cast<double>(n)));
  auto scale = torch::full({n, 1}, std::sqrt(2.0 / static_cast<double>(n)), torch::kFloat64);
  scale[0] = std::sqrt(1.0 / static_cast<double>(n));
  return (basis * scale).to(dtype);
}

torch::Tensor dct_per_channel(const torch::Tensor& tokens) {
  if (tokens.dim() != 3) throw ShapeError("dct_per_channel: expected [B, N, D]");
  return torch::matmul(dct_matrix(tokens.size(1), tokens.scalar_type()).to(tokens.device()), tokens);
}

torch::Tensor idct_per_channel(const torch::Tensor& coefficients) {
  if (coefficients.dim() != 3) throw ShapeError("idct_per_channel: expected [B, N, D]");
  auto basis = dct_matrix(coefficients.size(1), coefficients.scalar_type()).to(coefficients.device());
  return torch::matmul(basis.transpose(0, 1), coefficients);
}

}  // namespace swinmark::blocks
