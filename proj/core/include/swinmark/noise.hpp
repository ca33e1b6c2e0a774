// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <torch/types.h>

#include "swinmark/rng.hpp"

namespace swinmark::noise {

enum class Kind {
  identity,
  gaussian_noise,
  salt_pepper,
  gaussian_blur,
  median_blur,
  jpeg,
  cropout,
  dropout,
  rotation,
  scaling,
  affine,
};

inline constexpr std::array<Kind, 11> kAllKinds = {
    Kind::identity, Kind::gaussian_noise, Kind::salt_pepper, Kind::gaussian_blur,
    Kind::median_blur, Kind::jpeg, Kind::cropout, Kind::dropout,
    Kind::rotation, Kind::scaling, Kind::affine};

std::string_view kind_name(Kind kind);
/// Throws std::invalid_argument for an unknown name.
Kind parse_kind(std::string_view name);
/// Cropout, dropout, rotation, scaling and affine are reported as geometric.
bool is_geometric(Kind kind);
/// Cropout and dropout paste pixels from the cover image.
bool needs_cover(Kind kind);

struct Identity {};
struct GaussianNoise { double variance = 0; };
struct SaltPepper { double ratio = 0; };
struct GaussianBlur { double sigma = 0; };
struct MedianBlur { int64_t window = 3; };
struct Jpeg { int64_t quality = 50; };
struct Cropout { double ratio = 0; };  // fraction of the area reverting to the cover
struct Dropout { double ratio = 0; };
struct Rotation { double degrees = 0; };
struct Scaling { double factor = 1; };
struct Affine {
  double rotation_deg = 0;
  double translate = 0;  // fraction of width / height, applied on both axes
  double scale = 1;
  double shear_deg = 0;
};

using Attack = std::variant<Identity, GaussianNoise, SaltPepper, GaussianBlur, MedianBlur, Jpeg,
                            Cropout, Dropout, Rotation, Scaling, Affine>;

/// One concrete attack with its strength. The text form is
/// `kind[:p1,p2,...]`, e.g. `jpeg:50` or `affine:10,0.1,0.7,30`.
struct DistortionSpec {
  Attack attack;

  [[nodiscard]] Kind kind() const;
  /// Throws std::invalid_argument when a parameter is out of range.
  void validate() const;
  /// Strength parameters joined by commas; empty for identity.
  [[nodiscard]] std::string strength() const;
  [[nodiscard]] std::vector<double> params() const;
  [[nodiscard]] std::string to_string() const;

  static DistortionSpec parse(std::string_view text);
  static DistortionSpec from_params(Kind kind, const std::vector<double>& params);

  friend bool operator==(const DistortionSpec& a, const DistortionSpec& b) {
    return a.kind() == b.kind() && a.params() == b.params();
  }
};

/// Draws a training-time strength for `kind` from its training range.
DistortionSpec sample_train_spec(Kind kind, Rng& rng);

/// Evaluation strengths for `kind`, in report column order.
std::vector<DistortionSpec> test_grid(Kind kind);

/// Records the rounding residuals of jpeg_sim on first use and replays them
/// afterwards, which holds the quantisation decisions fixed while the input
/// moves (finite-difference checks of the straight-through graph).
struct QuantizationTape {
  std::vector<torch::Tensor> residuals;
  bool replay = false;
  size_t cursor = 0;
};

/// Applies `spec` to `watermarked` ([B, 3, H, W]); `cover` must have the same
/// shape (used by cropout and dropout, otherwise ignored). The result always
/// has the input shape.
torch::Tensor apply(const DistortionSpec& spec, const torch::Tensor& watermarked,
                    const torch::Tensor& cover, Rng& rng, QuantizationTape* tape = nullptr);

torch::Tensor gaussian_noise(const torch::Tensor& x, double variance, Rng& rng);
/// Straight-through: gradient is the identity everywhere.
torch::Tensor salt_pepper(const torch::Tensor& x, double ratio, Rng& rng);

/// Normalised 1-D Gaussian taps; size 2*ceil(3 sigma)+1, at least 3.
torch::Tensor gaussian_kernel(double sigma);
/// Depthwise Gaussian blur with reflect padding.
torch::Tensor gaussian_blur(const torch::Tensor& x, double sigma);
/// Per-channel median over a window x window neighbourhood (reflect padding).
/// Straight-through gradient.
torch::Tensor median_blur(const torch::Tensor& x, int64_t window);

/// Standard luminance / chrominance quantisation tables scaled for `quality`
/// with the IJG formula; each [8, 8] float, entries in [1, 255].
std::pair<torch::Tensor, torch::Tensor> jpeg_quant_tables(int64_t quality);
/// 8x8 blockwise orthonormal DCT of [B, C, H, W] (H, W multiples of 8),
/// returned in the same layout.
torch::Tensor block_dct(const torch::Tensor& x);
torch::Tensor block_idct(const torch::Tensor& x);
/// Differentiable JPEG simulation (4:4:4). Rounding uses
/// x + stopgrad(round(x) - x).
torch::Tensor jpeg_sim(const torch::Tensor& x, int64_t quality, QuantizationTape* tape = nullptr);

/// The watermarked pixels outside one random rectangle of area ratio * H * W
/// complement are replaced by cover pixels.
torch::Tensor cropout(const torch::Tensor& x, const torch::Tensor& cover, double ratio, Rng& rng);
/// Each pixel independently reverts to the cover with probability `ratio`.
torch::Tensor dropout(const torch::Tensor& x, const torch::Tensor& cover, double ratio, Rng& rng);

/// Bilinear warp with zero fill; `inverse` maps output pixel coordinates
/// (origin at the image centre, x right, y down) to input coordinates:
/// in = inverse[:, :2] * out + inverse[:, 2]. `inverse` is [2, 3] float64.
torch::Tensor warp(const torch::Tensor& x, const torch::Tensor& inverse);
/// Counter-clockwise rotation (as displayed) about the image centre.
torch::Tensor rotate(const torch::Tensor& x, double degrees);
/// Resize about the centre onto the original canvas.
torch::Tensor scale(const torch::Tensor& x, double factor);
/// Content map p' = R (S Sh p + T): shear along x, uniform scale, translation
/// by (t W, t H), then rotation.
torch::Tensor affine(const torch::Tensor& x, const Affine& params);

}  // namespace swinmark::noise
