// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include <ATen/core/Generator.h>
#include <torch/types.h>

namespace swinmark {

/// The single seeded source of randomness.
///
/// Wraps a CPU generator so tensor sampling (`torch::rand(..., gen)`) and
/// scalar draws share one stream. Not thread-safe; concurrent workers must
/// each take a `split()` stream.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  [[nodiscard]] at::Generator& generator() { return gen_; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [lo, hi] (inclusive).
  int64_t uniform_int(int64_t lo, int64_t hi);

  /// Independent child stream; deterministic in (parent state, stream id).
  /// Advances the parent by one draw.
  Rng split(uint64_t stream_id);

  /// Opaque generator state for checkpointing.
  [[nodiscard]] torch::Tensor state() const;
  void set_state(const torch::Tensor& state);

 private:
  at::Generator gen_;
};

/// i.i.d. uniform message bits in {0, 1} as a float tensor [batch, bits].
torch::Tensor sample_message(int64_t batch, int64_t bits, Rng& rng);

}  // namespace swinmark
