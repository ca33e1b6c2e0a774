// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <torch/types.h>

namespace swinmark::testing {

/// Directory holding the bundled natural test images.
std::filesystem::path natural_image_dir();
/// The bundled natural images resized to height x width, [N, 3, H, W].
torch::Tensor natural_images(int64_t height, int64_t width);
/// Uniform [0, 1) images from a private generator.
torch::Tensor random_images(int64_t batch, int64_t height, int64_t width, uint64_t seed);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "swinmark");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace swinmark::testing
