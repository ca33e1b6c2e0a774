// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <torch/optim/adamw.h>
#include <torch/types.h>

#include "swinmark/config.hpp"
#include "swinmark/networks.hpp"
#include "swinmark/noise.hpp"
#include "swinmark/objectives.hpp"
#include "swinmark/rng.hpp"

namespace swinmark::training {

/// Cosine decay from `start` to `end` over `steps`; constant `end` afterwards.
class CosineSchedule {
 public:
  CosineSchedule(double start, double end, int64_t steps);
  [[nodiscard]] double at(int64_t step) const;

 private:
  double start_;
  double end_;
  int64_t steps_;
};

/// Cover images held in memory as [N, 3, H, W] in [0, 1].
class ImageDataset {
 public:
  explicit ImageDataset(torch::Tensor images, std::string id = "memory");
  /// Every decodable image under `dir`, center-cropped and resized.
  static ImageDataset from_directory(const std::filesystem::path& dir, int64_t height, int64_t width);

  [[nodiscard]] int64_t size() const { return images_.size(0); }
  [[nodiscard]] const torch::Tensor& images() const { return images_; }
  [[nodiscard]] const std::string& id() const { return id_; }
  /// `count` distinct images in random order when count <= size, otherwise
  /// draws with replacement.
  [[nodiscard]] torch::Tensor sample(int64_t count, Rng& rng) const;

 private:
  torch::Tensor images_;
  std::string id_;
};

/// Raised when a training step yields NaN or infinity. `dump` names the file
/// holding the offending batch, when one could be written.
class NonFiniteLoss : public std::runtime_error {
 public:
  NonFiniteLoss(const std::string& what, std::filesystem::path dump)
      : std::runtime_error(what), dump_(std::move(dump)) {}
  [[nodiscard]] const std::filesystem::path& dump() const { return dump_; }

 private:
  std::filesystem::path dump_;
};

struct StepResult {
  int64_t step = 0;  // index of the step just taken
  double lr = 0;
  double image_loss = 0;
  double message_loss = 0;
  double constraint_loss = 0;
  double total_loss = 0;
  double bit_accuracy = 0;
  double psnr_db = 0;
  std::string distortion;
};

/// Single-threaded training loop for one specialist model: the distortion
/// kind comes from `config.train_distortion` (a kind name samples from its
/// training range; a full `kind:params` spec is applied as given).
class Trainer {
 public:
  Trainer(const ExperimentConfig& config, ImageDataset dataset);

  /// One optimisation step.
  StepResult step();
  /// Steps until `config.steps`, calling `on_step` after each one. Writes
  /// `checkpoint_dir/step_<n>.pt` every `checkpoint_every` steps when a
  /// directory is given.
  void run(const std::function<void(const StepResult&)>& on_step = {},
           const std::optional<std::filesystem::path>& checkpoint_dir = std::nullopt);

  /// Loss of the next step without updating anything (rng state restored).
  objectives::LossBreakdown peek_loss();

  void save(const std::filesystem::path& path);
  /// Restores parameters, optimiser moments, step and rng state.
  void load(const std::filesystem::path& path);

  [[nodiscard]] int64_t current_step() const { return step_; }
  [[nodiscard]] const ExperimentConfig& config() const { return config_; }
  [[nodiscard]] nets::WatermarkModel& model() { return model_; }
  [[nodiscard]] torch::optim::AdamW& optimizer() { return *optimizer_; }
  [[nodiscard]] Rng& rng() { return rng_; }
  [[nodiscard]] const CosineSchedule& schedule() const { return schedule_; }
  /// Where the offending batch goes when the loss turns non-finite.
  void set_dump_dir(std::filesystem::path dir) { dump_dir_ = std::move(dir); }

 private:
  struct Forward {
    objectives::LossBreakdown loss;
    torch::Tensor cover, message, watermarked, noised, logits;
    noise::DistortionSpec spec;
  };
  Forward forward();

  ExperimentConfig config_;
  ImageDataset dataset_;
  Rng rng_;
  nets::WatermarkModel model_;
  std::unique_ptr<torch::optim::AdamW> optimizer_;
  CosineSchedule schedule_;
  std::optional<noise::Kind> sampled_kind_;
  std::optional<noise::DistortionSpec> fixed_spec_;
  int64_t step_ = 0;
  std::filesystem::path dump_dir_ = ".";
};

/// Formats one log line for a step.
std::string format_step(const StepResult& result);

// ---------------------------------------------------------------------------
// Evaluation

struct SweepRow {
  std::string kind;
  std::string strength;       // comma separated parameters; empty for identity
  double psnr_db = 0;         // 8-bit export vs cover, RGB, before the attack
  double acc_pct = 0;         // bit accuracy after the attack, percent
  std::optional<double> internal_psnr_db;  // unquantised encoder output vs cover
};

struct SweepMetadata {
  std::string config_hash;
  std::string checkpoint_id;
  std::string dataset_id;
  int64_t batch_size = 0;
  int64_t steps = 0;
  double weight_decay = 0;
  uint64_t seed = 0;
};

struct SweepReport {
  SweepMetadata metadata;
  std::vector<SweepRow> rows;
};

/// Embeds fresh random messages into every image for each spec, exports the
/// result at 8 bits, attacks it and decodes. Deterministic in `seed`; leaves
/// the model untouched.
SweepReport evaluate_sweep(nets::WatermarkModel& model, const ImageDataset& images,
                           const std::vector<noise::DistortionSpec>& grid, uint64_t seed,
                           int64_t batch_size = 16);

/// Evaluation strengths for `kind`: the config's `grid.<kind>` entry when
/// present, otherwise the built-in test grid.
std::vector<noise::DistortionSpec> resolve_grid(const ExperimentConfig& config, noise::Kind kind);

/// CSV with header `kind,strength,psnr_db,acc_pct`; metadata goes into
/// leading `#` comment lines.
std::string to_csv(const SweepReport& report);
/// Parses `to_csv` output (comment lines and blank lines are skipped).
/// Throws DataError on malformed input.
SweepReport parse_csv(const std::string& text);
/// One aligned table per distortion kind, strengths as columns.
std::string render_tables(const SweepReport& report);
/// Column heading for one strength, e.g. `QF=50` or `θ=15°`.
std::string strength_label(noise::Kind kind, const std::string& strength);

// ---------------------------------------------------------------------------
// Ablation

enum class Ablation { lceb, feb };

struct AblationRow {
  std::string name;
  int64_t parameters = 0;
  double psnr_db = 0;
  double acc_pct = 0;
};

struct AblationReport {
  AblationRow baseline;
  AblationRow variant;
  [[nodiscard]] double delta_psnr_db() const { return baseline.psnr_db - variant.psnr_db; }
  [[nodiscard]] double delta_acc_pct() const { return baseline.acc_pct - variant.acc_pct; }
};

/// Trains the full model and the variant without the chosen block under the
/// same seed and data, then evaluates both against the training distortion.
AblationReport ablate(const ExperimentConfig& config, const ImageDataset& dataset, Ablation which,
                      const std::function<void(const std::string&, const StepResult&)>& on_step = {});
std::string render_ablation(const AblationReport& report);

}  // namespace swinmark::training
