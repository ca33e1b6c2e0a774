// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#include "support/fixtures.hpp"

#include <atomic>
#include <random>

#include <fmt/format.h>
#include <torch/torch.h>
#include <unistd.h>

#include "swinmark/image_io.hpp"
#include "swinmark/rng.hpp"

namespace swinmark::testing {

std::filesystem::path natural_image_dir() {
  return std::filesystem::path(SWINMARK_TEST_DATA_DIR) / "natural";
}

torch::Tensor natural_images(int64_t height, int64_t width) {
  return load_image_dir(natural_image_dir(), height, width);
}

torch::Tensor random_images(int64_t batch, int64_t height, int64_t width, uint64_t seed) {
  Rng rng(seed);
  return torch::rand({batch, 3, height, width}, rng.generator());
}

TempDir::TempDir(const std::string& prefix) {
  static std::atomic<int> counter{0};
  std::random_device device;
  path_ = std::filesystem::temp_directory_path() /
          fmt::format("{}-{}-{}-{:08x}", prefix, ::getpid(), counter++, device());
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ignored;
  std::filesystem::remove_all(path_, ignored);
}

}  // namespace swinmark::testing
