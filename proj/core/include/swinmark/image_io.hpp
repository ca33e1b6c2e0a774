// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <torch/types.h>

namespace swinmark {

/// Reads an image file as RGB float [1, 3, H, W] in [0, 1] (8-bit value / 255).
/// The image is center-cropped to the target aspect ratio and resized with
/// area interpolation; pass 0 for both sides to keep the native size.
/// Throws DataError when the file cannot be decoded.
torch::Tensor load_image(const std::filesystem::path& path, int64_t height = 0, int64_t width = 0);

/// Loads every decodable image in a directory (sorted by file name) and
/// stacks them into [N, 3, H, W]. Throws DataError when none are found.
torch::Tensor load_image_dir(const std::filesystem::path& dir, int64_t height, int64_t width);

/// Writes [3, H, W] or [1, 3, H, W] as an 8-bit image; the format follows the
/// extension (PNG recommended, it is lossless). Values are clamped to [0, 1].
void save_image(const std::filesystem::path& path, const torch::Tensor& image);

/// Clamp to [0, 1] and round to the nearest 1/255 step: exactly what an 8-bit
/// export followed by a reload produces.
torch::Tensor quantize_8bit(const torch::Tensor& image);

/// Encodes [B, 3, H, W] with libjpeg at the given quality (4:4:4 chroma,
/// standard tables) and decodes it back; the reference codec for jpeg_sim.
torch::Tensor reference_jpeg(const torch::Tensor& image, int quality);

/// Raw JPEG bytes for one image [3, H, W] or [1, 3, H, W].
std::vector<uint8_t> encode_jpeg(const torch::Tensor& image, int quality);
torch::Tensor decode_jpeg(const std::vector<uint8_t>& bytes);

}  // namespace swinmark
