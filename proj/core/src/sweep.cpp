// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#include <fmt/format.h>
#include <torch/torch.h>

#include "swinmark/errors.hpp"
#include "swinmark/image_io.hpp"
#include "swinmark/training.hpp"

namespace swinmark::training {
namespace {

// Restores the module's training flag on scope exit.
class EvalModeGuard {
 public:
  explicit EvalModeGuard(torch::nn::Module& module) : module_(module), was_training_(module.is_training()) {
    module_.eval();
  }
  ~EvalModeGuard() { module_.train(was_training_); }
  EvalModeGuard(const EvalModeGuard&) = delete;
  EvalModeGuard& operator=(const EvalModeGuard&) = delete;

 private:
  torch::nn::Module& module_;
  bool was_training_;
};

}  // namespace

SweepReport evaluate_sweep(nets::WatermarkModel& model, const ImageDataset& images,
                           const std::vector<noise::DistortionSpec>& grid, uint64_t seed, int64_t batch_size) {
  if (batch_size <= 0) throw std::invalid_argument("evaluate_sweep: batch size must be positive");
  const auto& config = model->config();
  const auto& covers = images.images();
  if (covers.size(2) != config.height || covers.size(3) != config.width) {
    throw ConfigError(fmt::format("evaluate_sweep: images are {}x{} but the model expects {}x{}", covers.size(2),
                                  covers.size(3), config.height, config.width));
  }

  torch::NoGradGuard no_grad;
  EvalModeGuard eval_mode(*model);

  SweepReport report;
  report.metadata.config_hash = config.hash();
  report.metadata.dataset_id = images.id();
  report.metadata.batch_size = config.batch_size;
  report.metadata.steps = config.steps;
  report.metadata.weight_decay = config.weight_decay;
  report.metadata.seed = seed;

  const auto n = images.size();
  for (size_t i = 0; i < grid.size(); ++i) {
    const auto& spec = grid[i];
    Rng rng = Rng(seed).split(i);
    double psnr_sum = 0, internal_sum = 0;
    int64_t correct = 0, total = 0;
    for (int64_t start = 0; start < n; start += batch_size) {
      auto cover = covers.slice(0, start, std::min(n, start + batch_size));
      auto message = sample_message(cover.size(0), config.message_bits, rng);
      auto watermarked = model->encode(cover, message);
      auto exported = quantize_8bit(watermarked);
      psnr_sum += objectives::psnr_per_image(exported, cover).sum().item<double>();
      internal_sum += objectives::psnr_per_image(watermarked, cover).sum().item<double>();
      auto attacked = noise::apply(spec, exported, cover, rng);
      auto logits = model->decode(attacked);
      correct += ((logits > 0) == (message > 0.5)).sum().item<int64_t>();
      total += message.numel();
    }
    SweepRow row;
    row.kind = std::string(noise::kind_name(spec.kind()));
    row.strength = spec.strength();
    row.psnr_db = psnr_sum / static_cast<double>(n);
    row.internal_psnr_db = internal_sum / static_cast<double>(n);
    row.acc_pct = 100.0 * static_cast<double>(correct) / static_cast<double>(total);
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::vector<noise::DistortionSpec> resolve_grid(const ExperimentConfig& config, noise::Kind kind) {
  const auto name = std::string(noise::kind_name(kind));
  auto it = config.grids.find(name);
  if (it == config.grids.end()) return noise::test_grid(kind);
  std::vector<noise::DistortionSpec> grid;
  for (const auto& strength : it->second) {
    grid.push_back(noise::DistortionSpec::parse(strength.empty() ? name : name + ":" + strength));
  }
  return grid;
}

AblationReport ablate(const ExperimentConfig& config, const ImageDataset& dataset, Ablation which,
                      const std::function<void(const std::string&, const StepResult&)>& on_step) {
  ExperimentConfig variant = config;
  std::string variant_name;
  if (which == Ablation::lceb) {
    variant.use_lceb = false;
    variant_name = "use_lceb=false";
  } else {
    variant.use_feb = false;
    variant_name = "use_feb=false";
  }

  std::vector<noise::DistortionSpec> grid;
  if (config.train_distortion.find(':') != std::string::npos) {
    grid.push_back(noise::DistortionSpec::parse(config.train_distortion));
  } else {
    grid = resolve_grid(config, noise::parse_kind(config.train_distortion));
  }

  auto run_one = [&](const ExperimentConfig& c, const std::string& name) {
    Trainer trainer(c, dataset);
    trainer.run([&](const StepResult& r) {
      if (on_step) on_step(name, r);
    });
    auto report = evaluate_sweep(trainer.model(), dataset, grid, c.seed, c.batch_size);
    AblationRow row;
    row.name = name;
    row.parameters = nets::count_parameters(*trainer.model());
    for (const auto& r : report.rows) {
      row.psnr_db += r.psnr_db;
      row.acc_pct += r.acc_pct;
    }
    row.psnr_db /= static_cast<double>(report.rows.size());
    row.acc_pct /= static_cast<double>(report.rows.size());
    return row;
  };

  return {run_one(config, "full"), run_one(variant, variant_name)};
}

}  // namespace swinmark::training
