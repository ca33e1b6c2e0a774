// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>

#include <torch/torch.h>

#include "swinmark/errors.hpp"
#include "swinmark/noise.hpp"

namespace swinmark::noise {
namespace F = torch::nn::functional;
namespace {

struct Mat2x3 {
  double m[2][3];
};

double radians(double degrees) { return degrees * std::numbers::pi / 180.0; }

torch::Tensor to_tensor(const Mat2x3& a) {
  return torch::tensor({a.m[0][0], a.m[0][1], a.m[0][2], a.m[1][0], a.m[1][1], a.m[1][2]}, torch::kFloat64)
      .view({2, 3});
}

// Inverse of the forward content map p' = A p + t.
Mat2x3 invert(double a00, double a01, double a10, double a11, double t0, double t1) {
  const double det = a00 * a11 - a01 * a10;
  if (std::abs(det) < 1e-12) throw std::invalid_argument("warp: singular transform");
  const double i00 = a11 / det, i01 = -a01 / det, i10 = -a10 / det, i11 = a00 / det;
  return {{{i00, i01, -(i00 * t0 + i01 * t1)}, {i10, i11, -(i10 * t0 + i11 * t1)}}};
}

}  // namespace

torch::Tensor warp(const torch::Tensor& x, const torch::Tensor& inverse) {
  if (x.dim() != 4) throw ShapeError("warp: expected [B, C, H, W]");
  if (inverse.sizes() != torch::IntArrayRef{2, 3}) throw ShapeError("warp: inverse must be [2, 3]");
  auto a = inverse.to(torch::kFloat64).contiguous();
  if (torch::equal(a, torch::eye(2, 3, torch::kFloat64))) return x;
  auto acc = a.accessor<double, 2>();
  const double h = static_cast<double>(x.size(2)), w = static_cast<double>(x.size(3));
  auto theta = torch::tensor({acc[0][0], acc[0][1] * h / w, 2 * acc[0][2] / w,
                              acc[1][0] * w / h, acc[1][1], 2 * acc[1][2] / h},
                             torch::kFloat64)
                   .view({1, 2, 3})
                   .to(x.options().requires_grad(false))
                   .expand({x.size(0), 2, 3});
  auto grid = F::affine_grid(theta, x.sizes(), false);
  return F::grid_sample(x, grid,
                        F::GridSampleFuncOptions()
                            .mode(torch::kBilinear)
                            .padding_mode(torch::kZeros)
                            .align_corners(false));
}

torch::Tensor rotate(const torch::Tensor& x, double degrees) {
  if (!std::isfinite(degrees)) throw std::invalid_argument("rotation: angle must be finite");
  if (degrees == 0) return x;
  const double c = std::cos(radians(degrees)), s = std::sin(radians(degrees));
  return warp(x, to_tensor(invert(c, s, -s, c, 0, 0)));
}

torch::Tensor scale(const torch::Tensor& x, double factor) {
  if (!(factor > 0) || !std::isfinite(factor)) throw std::invalid_argument("scaling: factor must be > 0");
  if (factor == 1) return x;
  return warp(x, to_tensor(invert(factor, 0, 0, factor, 0, 0)));
}

torch::Tensor affine(const torch::Tensor& x, const Affine& p) {
  DistortionSpec{p}.validate();
  if (p.rotation_deg == 0 && p.translate == 0 && p.scale == 1 && p.shear_deg == 0) return x;
  const double h = static_cast<double>(x.size(2)), w = static_cast<double>(x.size(3));
  const double c = std::cos(radians(p.rotation_deg)), s = std::sin(radians(p.rotation_deg));
  const double shear = std::tan(radians(p.shear_deg));
  // S * Sh
  const double b00 = p.scale, b01 = p.scale * shear, b10 = 0, b11 = p.scale;
  const double t0 = p.translate * w, t1 = p.translate * h;
  // R * (S Sh p + T)
  const double a00 = c * b00 + s * b10, a01 = c * b01 + s * b11;
  const double a10 = -s * b00 + c * b10, a11 = -s * b01 + c * b11;
  return warp(x, to_tensor(invert(a00, a01, a10, a11, c * t0 + s * t1, -s * t0 + c * t1)));
}

}  // namespace swinmark::noise
