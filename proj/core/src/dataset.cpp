// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#include <torch/torch.h>

#include "swinmark/errors.hpp"
#include "swinmark/image_io.hpp"
#include "swinmark/training.hpp"

namespace swinmark::training {

ImageDataset::ImageDataset(torch::Tensor images, std::string id)
    : images_(std::move(images)), id_(std::move(id)) {
  if (images_.dim() != 4 || images_.size(1) != 3 || images_.size(0) == 0) {
    throw ShapeError("dataset: expected a non-empty [N, 3, H, W] tensor");
  }
  images_ = images_.to(torch::kFloat32).contiguous();
}

ImageDataset ImageDataset::from_directory(const std::filesystem::path& dir, int64_t height, int64_t width) {
  return ImageDataset(load_image_dir(dir, height, width), dir.filename().string());
}

torch::Tensor ImageDataset::sample(int64_t count, Rng& rng) const {
  if (count <= 0) throw std::invalid_argument("dataset: sample count must be positive");
  torch::Tensor index;
  if (count <= size()) {
    index = torch::randperm(size(), rng.generator(), torch::kInt64).slice(0, 0, count);
  } else {
    index = torch::randint(0, size(), {count}, rng.generator(), torch::kInt64);
  }
  return images_.index_select(0, index);
}

}  // namespace swinmark::training
