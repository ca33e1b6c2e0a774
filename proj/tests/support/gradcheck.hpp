// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <torch/types.h>

#include "swinmark/config.hpp"
#include "swinmark/noise.hpp"

namespace swinmark::testing {

/// |a - n| / max(|a|, |n|); 0 when both are 0.
double relative_error(double analytic, double numeric);

/// Central difference of a scalar function of `x` at every element, in
/// double precision on a float64 copy.
torch::Tensor numeric_gradient(const std::function<torch::Tensor(const torch::Tensor&)>& f,
                               const torch::Tensor& x, double step);

struct ParameterCheck {
  std::string name;
  int64_t index = 0;
  double analytic = 0;
  double numeric = 0;
  double relative_error = 0;
};

struct ModelGradientCheck {
  std::vector<ParameterCheck> checks;
  [[nodiscard]] double max_relative_error() const;
};

/// Finite-difference check of d(total loss)/d(weight) for `count` model
/// weights of a freshly initialised model, through the distortion `spec`.
/// Every loss evaluation reuses the same random draws (noise, masks, JPEG
/// rounding decisions). Weights are drawn among those whose analytic
/// gradient is at least `floor` times the largest one.
ModelGradientCheck check_model_gradients(const ExperimentConfig& config, const noise::DistortionSpec& spec,
                                         int count, uint64_t seed, double step = 1e-3, double floor = 1e-2);

}  // namespace swinmark::testing
