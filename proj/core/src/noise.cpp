// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <fmt/format.h>
#include <torch/torch.h>

#include "swinmark/errors.hpp"
#include "swinmark/noise.hpp"

namespace swinmark::noise {
namespace F = torch::nn::functional;
namespace {

torch::Tensor straight_through(const torch::Tensor& x, const torch::Tensor& y) {
  return y + (x - x.detach());
}

void require_ratio(double r, const char* what) {
  if (!(r >= 0 && r <= 1)) throw std::invalid_argument(fmt::format("{}: ratio must be in [0, 1], got {}", what, r));
}

torch::Tensor reflect_pad(const torch::Tensor& x, int64_t pad, const char* what) {
  if (pad >= x.size(2) || pad >= x.size(3)) {
    throw ShapeError(fmt::format("{}: image {}x{} too small for reflect padding of {}", what, x.size(2),
                                 x.size(3), pad));
  }
  return F::pad(x, F::PadFuncOptions({pad, pad, pad, pad}).mode(torch::kReflect));
}

torch::Tensor pixel_mask(const torch::Tensor& x, double ratio, Rng& rng) {
  auto u = torch::rand({x.size(0), 1, x.size(2), x.size(3)}, rng.generator(),
                       torch::TensorOptions().dtype(x.scalar_type()).device(x.device()));
  return u < ratio;
}

}  // namespace

torch::Tensor gaussian_noise(const torch::Tensor& x, double variance, Rng& rng) {
  if (!(variance >= 0)) throw std::invalid_argument("gaussian_noise: variance must be >= 0");
  if (variance == 0) return x;
  auto eps = torch::randn(x.sizes(), rng.generator(), x.options().requires_grad(false));
  return x + eps * std::sqrt(variance);
}

torch::Tensor salt_pepper(const torch::Tensor& x, double ratio, Rng& rng) {
  require_ratio(ratio, "salt_pepper");
  if (ratio == 0) return x;
  auto hit = pixel_mask(x, ratio, rng);
  auto salt = torch::rand(hit.sizes(), rng.generator(), x.options().requires_grad(false)) < 0.5;
  auto value = salt.to(x.scalar_type()).expand_as(x);
  auto y = torch::where(hit.expand_as(x), value, x.detach());
  return straight_through(x, y);
}

torch::Tensor gaussian_kernel(double sigma) {
  if (!(sigma >= 0)) throw std::invalid_argument("gaussian_blur: sigma must be >= 0");
  const auto radius = std::max<int64_t>(1, static_cast<int64_t>(std::ceil(3 * sigma)));
  auto taps = torch::arange(-radius, radius + 1, torch::kFloat64);
  torch::Tensor k;
  if (sigma == 0) {
    k = (taps == 0).to(torch::kFloat64);
  } else {
    k = torch::exp(-(taps * taps) / (2 * sigma * sigma));
  }
  return (k / k.sum()).to(torch::kFloat32);
}

torch::Tensor gaussian_blur(const torch::Tensor& x, double sigma) {
  if (!(sigma >= 0)) throw std::invalid_argument("gaussian_blur: sigma must be >= 0");
  if (sigma == 0) return x;
  auto k = gaussian_kernel(sigma).to(x.options().requires_grad(false));
  const auto size = k.size(0);
  const auto channels = x.size(1);
  auto padded = reflect_pad(x, size / 2, "gaussian_blur");
  auto horizontal = k.view({1, 1, 1, size}).expand({channels, 1, 1, size}).contiguous();
  auto vertical = k.view({1, 1, size, 1}).expand({channels, 1, size, 1}).contiguous();
  auto y = F::conv2d(padded, horizontal, F::Conv2dFuncOptions().groups(channels));
  return F::conv2d(y, vertical, F::Conv2dFuncOptions().groups(channels));
}

torch::Tensor median_blur(const torch::Tensor& x, int64_t window) {
  if (window < 1 || window % 2 == 0) throw std::invalid_argument("median_blur: window must be odd");
  if (window == 1) return x;
  const auto b = x.size(0), c = x.size(1), h = x.size(2), w = x.size(3);
  auto padded = reflect_pad(x.detach(), window / 2, "median_blur");
  auto patches = padded.unfold(2, window, 1).unfold(3, window, 1);  // [B, C, H, W, k, k]
  auto y = std::get<0>(patches.reshape({b, c, h, w, window * window}).median(-1));
  return straight_through(x, y);
}

torch::Tensor cropout(const torch::Tensor& x, const torch::Tensor& cover, double ratio, Rng& rng) {
  require_ratio(ratio, "cropout");
  if (ratio == 0) return x;
  const auto b = x.size(0), h = x.size(2), w = x.size(3);
  const double side = std::sqrt(1.0 - ratio);
  const auto kh = static_cast<int64_t>(std::lround(h * side));
  const auto kw = static_cast<int64_t>(std::lround(w * side));
  auto keep = torch::zeros({b, 1, h, w}, torch::TensorOptions().dtype(torch::kBool).device(x.device()));
  if (kh > 0 && kw > 0) {
    for (int64_t i = 0; i < b; ++i) {
      const auto top = rng.uniform_int(0, h - kh);
      const auto left = rng.uniform_int(0, w - kw);
      keep[i].slice(1, top, top + kh).slice(2, left, left + kw).fill_(true);
    }
  }
  return torch::where(keep.expand_as(x), x, cover);
}

torch::Tensor dropout(const torch::Tensor& x, const torch::Tensor& cover, double ratio, Rng& rng) {
  require_ratio(ratio, "dropout");
  if (ratio == 0) return x;
  auto replace = pixel_mask(x, ratio, rng);
  return torch::where(replace.expand_as(x), cover, x);
}

}  // namespace swinmark::noise
