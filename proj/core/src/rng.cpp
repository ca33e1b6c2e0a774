// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#include "swinmark/rng.hpp"

#include <ATen/CPUGeneratorImpl.h>
#include <torch/torch.h>

#include "swinmark/errors.hpp"

namespace swinmark {

Rng::Rng(uint64_t seed) : gen_(at::make_generator<at::CPUGeneratorImpl>(seed)) {}

double Rng::uniform(double lo, double hi) {
  if (lo == hi) return lo;
  auto draw = torch::empty({1}, torch::kFloat64);
  draw.uniform_(lo, hi, gen_);
  return draw.item<double>();
}

int64_t Rng::uniform_int(int64_t lo, int64_t hi) {
  if (hi < lo) throw std::invalid_argument("Rng::uniform_int: empty range");
  auto draw = torch::empty({1}, torch::kInt64);
  draw.random_(lo, hi + 1, gen_);
  return draw.item<int64_t>();
}

Rng Rng::split(uint64_t stream_id) {
  auto draw = torch::empty({1}, torch::kInt64);
  draw.random_(0, std::numeric_limits<int64_t>::max(), gen_);
  const auto base = static_cast<uint64_t>(draw.item<int64_t>());
  // splitmix64 finaliser over (base, stream id)
  uint64_t z = base + 0x9e3779b97f4a7c15ull * (stream_id + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return Rng(z ^ (z >> 31));
}

torch::Tensor Rng::state() const { return gen_.get_state(); }

void Rng::set_state(const torch::Tensor& state) { gen_.set_state(state); }

torch::Tensor sample_message(int64_t batch, int64_t bits, Rng& rng) {
  if (bits <= 0 || batch <= 0) throw ShapeError("sample_message: batch and bits must be positive");
  return torch::randint(0, 2, {batch, bits}, rng.generator(), torch::kFloat32);
}

}  // namespace swinmark
