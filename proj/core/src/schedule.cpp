// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "swinmark/errors.hpp"
#include "swinmark/training.hpp"

namespace swinmark::training {

CosineSchedule::CosineSchedule(double start, double end, int64_t steps)
    : start_(start), end_(end), steps_(steps) {
  if (steps <= 0) throw ConfigError(fmt::format("schedule: steps must be positive, got {}", steps));
  if (!(start >= end && end > 0)) {
    throw ConfigError(fmt::format("schedule: need lr_start >= lr_end > 0, got {} and {}", start, end));
  }
}

double CosineSchedule::at(int64_t step) const {
  if (step <= 0) return start_;
  if (step >= steps_) return end_;
  const double progress = static_cast<double>(step) / static_cast<double>(steps_);
  return end_ + 0.5 * (start_ - end_) * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace swinmark::training
