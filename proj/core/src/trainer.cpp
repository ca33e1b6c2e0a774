// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <fmt/format.h>
#include <torch/torch.h>

#include "swinmark/errors.hpp"
#include "swinmark/training.hpp"

namespace swinmark::training {
namespace {

std::unique_ptr<torch::optim::AdamW> make_optimizer(nets::WatermarkModel& model, const ExperimentConfig& c) {
  auto options = torch::optim::AdamWOptions(c.lr_start)
                     .betas({c.beta1, c.beta2})
                     .weight_decay(c.weight_decay)
                     .eps(1e-8);
  return std::make_unique<torch::optim::AdamW>(model->parameters(), options);
}

objectives::LossWeights weights_of(const ExperimentConfig& c) {
  return {c.lambda_image, c.lambda_message, c.lambda_constraint};
}

}  // namespace

Trainer::Trainer(const ExperimentConfig& config, ImageDataset dataset)
    : config_((config.validate(), config)),
      dataset_(std::move(dataset)),
      rng_(config.seed),
      model_(config_, rng_),
      optimizer_(make_optimizer(model_, config_)),
      schedule_(config.lr_start, config.lr_end, config.steps) {
  if (dataset_.images().size(2) != config_.height || dataset_.images().size(3) != config_.width) {
    throw ShapeError(fmt::format("dataset images are {}x{}, config expects {}x{}", dataset_.images().size(2),
                                 dataset_.images().size(3), config_.height, config_.width));
  }
  if (config_.train_distortion.find(':') != std::string::npos) {
    fixed_spec_ = noise::DistortionSpec::parse(config_.train_distortion);
  } else {
    sampled_kind_ = noise::parse_kind(config_.train_distortion);
  }
}

Trainer::Forward Trainer::forward() {
  Forward f;
  f.cover = dataset_.sample(config_.batch_size, rng_);
  f.message = sample_message(config_.batch_size, config_.message_bits, rng_);
  f.watermarked = model_->encode(f.cover, f.message);
  f.spec = fixed_spec_ ? *fixed_spec_ : noise::sample_train_spec(*sampled_kind_, rng_);
  f.noised = noise::apply(f.spec, f.watermarked, f.cover, rng_);
  f.logits = model_->decode(f.noised);
  f.loss = objectives::total_loss(f.cover, f.watermarked, f.message, f.logits, weights_of(config_));
  return f;
}

StepResult Trainer::step() {
  const double lr = schedule_.at(step_);
  for (auto& group : optimizer_->param_groups()) {
    static_cast<torch::optim::AdamWOptions&>(group.options()).lr(lr);
  }

  auto f = forward();
  const double total = f.loss.total_value();
  if (!std::isfinite(total)) {
    auto dump = dump_dir_ / fmt::format("nonfinite_step_{}.pt", step_);
    try {
      torch::save(std::vector<torch::Tensor>{f.cover, f.message, f.watermarked.detach(), f.noised.detach(),
                                             f.logits.detach()},
                  dump.string());
    } catch (const std::exception&) {
      dump.clear();
    }
    throw NonFiniteLoss(fmt::format("non-finite loss {} at step {} under {} (batch dumped to '{}')", total, step_,
                                    f.spec.to_string(), dump.string()),
                        dump);
  }

  optimizer_->zero_grad();
  f.loss.total.backward();
  if (config_.grad_clip > 0) torch::nn::utils::clip_grad_norm_(model_->parameters(), config_.grad_clip);
  optimizer_->step();

  StepResult r;
  r.step = step_++;
  r.lr = lr;
  r.image_loss = f.loss.image_value();
  r.message_loss = f.loss.message_value();
  r.constraint_loss = f.loss.constraint_value();
  r.total_loss = total;
  r.bit_accuracy = objectives::bit_accuracy(f.message, f.logits);
  r.psnr_db = objectives::psnr(f.watermarked, f.cover);
  r.distortion = f.spec.to_string();
  return r;
}

void Trainer::run(const std::function<void(const StepResult&)>& on_step,
                  const std::optional<std::filesystem::path>& checkpoint_dir) {
  if (checkpoint_dir) std::filesystem::create_directories(*checkpoint_dir);
  while (step_ < config_.steps) {
    auto r = step();
    if (on_step) on_step(r);
    if (checkpoint_dir && config_.checkpoint_every > 0 && step_ % config_.checkpoint_every == 0) {
      save(*checkpoint_dir / fmt::format("step_{}.pt", step_));
    }
  }
}

objectives::LossBreakdown Trainer::peek_loss() {
  const auto state = rng_.state();
  torch::NoGradGuard no_grad;
  auto f = forward();
  rng_.set_state(state);
  return f.loss;
}

void Trainer::save(const std::filesystem::path& path) {
  nets::Checkpoint meta{config_, step_, rng_.state(), config_.train_distortion};
  nets::save_checkpoint(path, model_, meta, optimizer_.get());
}

void Trainer::load(const std::filesystem::path& path) {
  auto meta = nets::load_checkpoint(path, model_, optimizer_.get());
  step_ = meta.step;
  if (meta.rng_state) rng_.set_state(*meta.rng_state);
}

std::string format_step(const StepResult& r) {
  return fmt::format("step {:>6}  lr {:.3e}  loss {:.5f} (image {:.6f}, message {:.5f}, constraint {:.5f})  "
                     "acc {:6.2f}%  psnr {:6.2f} dB  [{}]",
                     r.step, r.lr, r.total_loss, r.image_loss, r.message_loss, r.constraint_loss,
                     100.0 * r.bit_accuracy, r.psnr_db, r.distortion);
}

}  // namespace swinmark::training
