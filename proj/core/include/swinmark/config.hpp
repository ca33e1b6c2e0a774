// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace swinmark {

/// All hyperparameters of one experiment.
///
/// The on-disk form is a flat `key = value` document (see `to_text`); every
/// field below has exactly one key, plus `grid.<kind>` entries holding the
/// evaluation strengths for a distortion kind. Unknown keys are rejected.
struct ExperimentConfig {
  // image / message geometry
  int64_t height = 128;
  int64_t width = 128;
  int64_t message_bits = 64;  // L

  // network shape
  int64_t patch = 2;         // P
  int64_t channels = 16;     // C, stem width
  int64_t stages = 3;        // K
  int64_t window = 4;        // attention window side, in tokens
  int64_t heads = 4;
  int64_t diffusion_len = 256;  // L1
  int64_t diffusion_side = 16;  // L2, with L2 * L2 == L1
  int64_t message_channels = 16;  // C1
  int64_t fetb_depth = 2;
  int64_t mlp_ratio = 4;
  int64_t lce_expansion = 4;
  bool use_lceb = true;
  bool use_feb = true;

  // objective
  double lambda_image = 2.0;
  double lambda_message = 10.0;
  double lambda_constraint = 0.1;

  // optimisation
  double lr_start = 1e-3;
  double lr_end = 1e-6;
  int64_t steps = 2000;
  int64_t batch_size = 16;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double grad_clip = 1.0;
  int64_t log_every = 100;
  int64_t checkpoint_every = 0;  // 0 disables periodic checkpoints

  // data / noise
  std::string train_distortion = "identity";
  std::string dataset;     // directory of training images
  std::string dataset_id;  // free-form label echoed into reports
  uint64_t seed = 0;

  /// Evaluation strengths keyed by distortion kind name; each strength is a
  /// comma separated parameter list, e.g. {"affine", {"10,0.1,0.7,30", ...}}.
  std::map<std::string, std::vector<std::string>> grids;

  /// Default desk-scale configuration (128x128, L=64).
  static ExperimentConfig defaults();
  /// 16x16 configuration used by gradient checks and overfit smoke tests.
  static ExperimentConfig tiny();

  /// Throws ConfigError on the first violated invariant.
  void validate() const;

  /// Token grid side (rows, cols) at encoder stage `s` (0..K).
  [[nodiscard]] int64_t grid_rows(int64_t stage) const;
  [[nodiscard]] int64_t grid_cols(int64_t stage) const;
  /// Feature-map channel count at encoder stage `s`: C * 2^s.
  [[nodiscard]] int64_t stage_channels(int64_t stage) const;

  /// Canonical text form; `parse(to_text())` reproduces the config exactly.
  [[nodiscard]] std::string to_text() const;
  /// Text of only the fields that determine network structure. Two configs
  /// with equal architecture text produce interchangeable checkpoints.
  [[nodiscard]] std::string architecture_text() const;
  /// Stable 64-bit FNV-1a hash of `to_text()`, as 16 hex digits.
  [[nodiscard]] std::string hash() const;

  /// Applies one `key=value` assignment. Throws ConfigError for unknown keys
  /// or unparsable values.
  void set(std::string_view key, std::string_view value);

  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

/// Splits `key=value`; throws ConfigError when `=` is missing.
std::pair<std::string, std::string> split_assignment(std::string_view assignment);

}  // namespace swinmark
