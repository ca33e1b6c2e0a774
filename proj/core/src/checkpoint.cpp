// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#include <fmt/format.h>
#include <torch/torch.h>

#include "swinmark/errors.hpp"
#include "swinmark/networks.hpp"

namespace swinmark::nets {
namespace {

constexpr const char* kFormat = "swinmark-checkpoint-v1";

std::string read_string(torch::serialize::InputArchive& archive, const std::string& key) {
  c10::IValue value;
  archive.read(key, value);
  return value.toStringRef();
}

Checkpoint read_meta(torch::serialize::InputArchive& archive) {
  if (read_string(archive, "format") != kFormat) throw DataError("not a swinmark checkpoint");
  Checkpoint meta;
  meta.config = ExperimentConfig::parse(read_string(archive, "config"));
  meta.distortion = read_string(archive, "distortion");
  c10::IValue step;
  archive.read("step", step);
  meta.step = step.toInt();
  torch::Tensor state;
  if (archive.try_read("rng_state", state, /*is_buffer=*/true)) meta.rng_state = state;
  return meta;
}

torch::serialize::InputArchive open_archive(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw DataError(fmt::format("checkpoint '{}' does not exist", path.string()));
  }
  torch::serialize::InputArchive archive;
  try {
    archive.load_from(path.string());
  } catch (const c10::Error& e) {
    throw DataError(fmt::format("cannot read checkpoint '{}': {}", path.string(), e.what_without_backtrace()));
  }
  return archive;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, WatermarkModel& model, const Checkpoint& meta,
                     torch::optim::Optimizer* optimizer) {
  torch::serialize::OutputArchive archive;
  archive.write("format", c10::IValue(std::string(kFormat)));
  archive.write("config", c10::IValue(meta.config.to_text()));
  archive.write("distortion", c10::IValue(meta.distortion));
  archive.write("step", c10::IValue(meta.step));
  if (meta.rng_state) archive.write("rng_state", *meta.rng_state, /*is_buffer=*/true);

  torch::serialize::OutputArchive weights;
  model->save(weights);
  archive.write("model", weights);
  if (optimizer != nullptr) {
    torch::serialize::OutputArchive opt;
    optimizer->save(opt);
    archive.write("optimizer", opt);
  }
  archive.save_to(path.string());
}

Checkpoint read_checkpoint_meta(const std::filesystem::path& path) {
  auto archive = open_archive(path);
  return read_meta(archive);
}

Checkpoint load_checkpoint(const std::filesystem::path& path, WatermarkModel& model,
                           torch::optim::Optimizer* optimizer) {
  auto archive = open_archive(path);
  auto meta = read_meta(archive);
  if (meta.config.architecture_text() != model->config().architecture_text()) {
    throw ConfigError(fmt::format("checkpoint '{}' was trained with a different architecture:\n{}",
                                  path.string(), meta.config.architecture_text()));
  }
  torch::serialize::InputArchive weights;
  archive.read("model", weights);
  model->load(weights);
  if (optimizer != nullptr) {
    torch::serialize::InputArchive opt;
    if (!archive.try_read("optimizer", opt)) throw DataError("checkpoint has no optimizer state");
    optimizer->load(opt);
  }
  return meta;
}

std::pair<WatermarkModel, Checkpoint> load_model(const std::filesystem::path& path) {
  auto meta = read_checkpoint_meta(path);
  Rng scratch(meta.config.seed);
  WatermarkModel model(meta.config, scratch);
  load_checkpoint(path, model);
  return {model, meta};
}

}  // namespace swinmark::nets
