// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#include "swinmark/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <torch/torch.h>

#include "swinmark/config.hpp"
#include "swinmark/errors.hpp"
#include "swinmark/image_io.hpp"
#include "swinmark/networks.hpp"
#include "swinmark/noise.hpp"
#include "swinmark/objectives.hpp"
#include "swinmark/rng.hpp"
#include "swinmark/training.hpp"

namespace swinmark::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct ConfigOptions {
  std::string path;
  std::string preset = "default";
  std::vector<std::string> overrides;
  std::optional<uint64_t> seed;
};

void add_config_options(CLI::App& cmd, ConfigOptions& o) {
  cmd.add_option("--config", o.path, "Config file (key = value lines)");
  cmd.add_option("--preset", o.preset, "Base config when --config is absent")
      ->check(CLI::IsMember({"default", "tiny"}));
  cmd.add_option("--override", o.overrides, "Set one config key, key=value (repeatable)");
  cmd.add_option("--seed", o.seed, "Override the config seed");
}

ExperimentConfig resolve_config(const ConfigOptions& o) {
  auto config = o.path.empty() ? (o.preset == "tiny" ? ExperimentConfig::tiny() : ExperimentConfig::defaults())
                               : ExperimentConfig::load(o.path);
  for (const auto& assignment : o.overrides) {
    const auto [key, value] = split_assignment(assignment);
    config.set(key, value);
  }
  if (o.seed) config.seed = *o.seed;
  config.validate();
  return config;
}

void log_config(std::ostream& err, const ExperimentConfig& config) {
  err << "# resolved config (hash " << config.hash() << ")\n";
  std::istringstream lines(config.to_text());
  for (std::string line; std::getline(lines, line);) err << "#   " << line << '\n';
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot read '{}'", path.string()));
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw DataError(fmt::format("cannot write '{}'", path.string()));
}

bool is_lossy(const fs::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".jpg" || ext == ".jpeg" || ext == ".webp";
}

void require_lossless(const fs::path& path, bool lossy_ok) {
  if (is_lossy(path) && !lossy_ok) {
    throw std::invalid_argument(fmt::format(
        "'{}' is a lossy format, which attacks the watermark; pass --lossy to write it anyway", path.string()));
  }
}

nets::WatermarkModel load_inference_model(const fs::path& checkpoint, std::ostream& err) {
  auto [model, meta] = nets::load_model(checkpoint);
  model->eval();
  log_config(err, model->config());
  err << "# checkpoint " << checkpoint.string() << " (step " << meta.step << ")\n";
  return model;
}

training::ImageDataset load_dataset(const std::string& dir, const ExperimentConfig& config) {
  const auto path = dir.empty() ? config.dataset : dir;
  if (path.empty()) throw std::invalid_argument("no image directory: pass --data or set `dataset` in the config");
  auto images = load_image_dir(path, config.height, config.width);
  const auto id = config.dataset_id.empty() ? fs::path(path).filename().string() : config.dataset_id;
  return training::ImageDataset(std::move(images), id);
}

// ---------------------------------------------------------------------------

struct TrainOptions {
  ConfigOptions config;
  std::string data;
  std::string distortion;
  std::string out;
  std::string checkpoint_dir;
  std::string resume;
};

int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  auto config = resolve_config(o.config);
  if (!o.distortion.empty()) {
    config.set("train_distortion", o.distortion);
    config.validate();
  }
  log_config(err, config);
  training::Trainer trainer(config, load_dataset(o.data, config));
  if (!o.resume.empty()) {
    trainer.load(o.resume);
    err << "# resumed from " << o.resume << " at step " << trainer.current_step() << '\n';
  }
  const auto out_path = fs::path(o.out);
  trainer.set_dump_dir(out_path.has_parent_path() ? out_path.parent_path() : fs::path("."));
  std::optional<fs::path> checkpoints;
  if (!o.checkpoint_dir.empty()) {
    fs::create_directories(o.checkpoint_dir);
    checkpoints = o.checkpoint_dir;
  }
  const auto every = std::max<int64_t>(1, config.log_every);
  trainer.run(
      [&](const training::StepResult& r) {
        if ((r.step + 1) % every == 0 || r.step + 1 == config.steps) out << training::format_step(r) << '\n';
      },
      checkpoints);
  trainer.save(out_path);
  out << "saved " << out_path.string() << " after " << trainer.current_step() << " steps\n";
  return kSuccess;
}

struct EmbedOptions {
  std::string checkpoint;
  std::string input;
  std::string out;
  std::string message_hex;
  std::string message_bits;
  uint64_t seed = 0;
  bool lossy = false;
};

int cmd_embed(const EmbedOptions& o, std::ostream& out, std::ostream& err) {
  const fs::path out_path = o.out;
  require_lossless(out_path, o.lossy);
  auto model = load_inference_model(o.checkpoint, err);
  const auto& config = model->config();
  const auto length = config.message_bits;

  torch::Tensor bits;
  if (!o.message_hex.empty()) {
    bits = hex_to_bits(o.message_hex, length);
  } else if (!o.message_bits.empty()) {
    bits = string_to_bits(o.message_bits, length);
  } else {
    Rng rng(o.seed);
    bits = sample_message(1, length, rng).reshape({length});
  }

  torch::NoGradGuard no_grad;
  auto cover = load_image(o.input, config.height, config.width);
  auto exported = quantize_8bit(model->encode(cover, bits.unsqueeze(0)));
  save_image(out_path, exported);
  const double psnr = objectives::psnr(exported, cover);

  json sidecar = {
      {"bits", bits_to_string(bits)},
      {"length", length},
      {"config_hash", config.hash()},
      {"checkpoint", fs::path(o.checkpoint).filename().string()},
      {"cover", o.input},
      {"psnr_db", psnr},
  };
  if (length % 4 == 0) sidecar["hex"] = bits_to_hex(bits);
  const auto sidecar_path = fs::path(out_path.string() + ".json");
  write_text(sidecar_path, sidecar.dump(2) + "\n");

  out << fmt::format("embedded {} bits into {} (PSNR {:.2f} dB)\n", length, out_path.string(), psnr);
  out << "bits: " << bits_to_string(bits) << '\n';
  out << "sidecar: " << sidecar_path.string() << '\n';
  return kSuccess;
}

struct ExtractOptions {
  std::string checkpoint;
  std::string input;
  std::string truth;
  bool as_json = false;
};

int cmd_extract(const ExtractOptions& o, std::ostream& out, std::ostream& err) {
  auto model = load_inference_model(o.checkpoint, err);
  const auto& config = model->config();
  torch::NoGradGuard no_grad;
  auto image = load_image(o.input, config.height, config.width);
  auto logits = model->decode(image).reshape({-1});
  auto bits = nets::logits_to_bits(logits);
  auto confidence = torch::sigmoid(logits.to(torch::kFloat64));

  std::vector<double> conf(static_cast<size_t>(confidence.numel()));
  std::copy_n(confidence.data_ptr<double>(), conf.size(), conf.begin());

  std::optional<double> acc;
  if (!o.truth.empty()) {
    json sidecar;
    try {
      sidecar = json::parse(read_text(o.truth));
    } catch (const json::exception& e) {
      throw DataError(fmt::format("'{}' is not a message record: {}", o.truth, e.what()));
    }
    if (!sidecar.contains("bits") || !sidecar["bits"].is_string()) {
      throw DataError(fmt::format("'{}' has no \"bits\" entry", o.truth));
    }
    auto expected = string_to_bits(sidecar["bits"].get<std::string>(), config.message_bits);
    acc = 100.0 * objectives::bit_accuracy(expected.unsqueeze(0), logits.unsqueeze(0));
  }

  if (o.as_json) {
    json result = {{"bits", bits_to_string(bits)}, {"confidence", conf}};
    if (config.message_bits % 4 == 0) result["hex"] = bits_to_hex(bits);
    if (acc) result["acc_pct"] = *acc;
    out << result.dump(2) << '\n';
    return kSuccess;
  }
  out << "bits: " << bits_to_string(bits) << '\n';
  if (config.message_bits % 4 == 0) out << "hex: " << bits_to_hex(bits) << '\n';
  out << "confidence:";
  for (double c : conf) out << fmt::format(" {:.4f}", c);
  out << '\n';
  if (acc) out << fmt::format("acc: {:.2f}%\n", *acc);
  return kSuccess;
}

struct AttackOptions {
  std::string spec;
  std::string input;
  std::string cover;
  std::string out;
  uint64_t seed = 0;
  bool lossy = false;
};

int cmd_attack(const AttackOptions& o, std::ostream& out, std::ostream& err) {
  const auto spec = noise::DistortionSpec::parse(o.spec);
  spec.validate();
  require_lossless(o.out, o.lossy);
  auto image = load_image(o.input);
  torch::Tensor cover;
  if (!o.cover.empty()) {
    cover = load_image(o.cover, image.size(2), image.size(3));
  } else if (noise::needs_cover(spec.kind())) {
    throw std::invalid_argument(fmt::format("{} pastes cover pixels: pass --cover", noise::kind_name(spec.kind())));
  }
  err << "# attack " << spec.to_string() << " seed " << o.seed << '\n';
  torch::NoGradGuard no_grad;
  Rng rng(o.seed);
  auto attacked = noise::apply(spec, image, cover, rng);
  save_image(o.out, attacked);
  out << spec.to_string() << '\n';
  return kSuccess;
}

struct EvaluateOptions {
  std::string checkpoint;
  std::string data;
  std::vector<std::string> kinds;
  std::vector<std::string> specs;
  std::string out;
  std::optional<uint64_t> seed;
  int64_t batch_size = 16;
};

int cmd_evaluate(const EvaluateOptions& o, std::ostream& out, std::ostream& err) {
  auto model = load_inference_model(o.checkpoint, err);
  const auto& config = model->config();
  std::vector<noise::DistortionSpec> grid;
  for (const auto& text : o.specs) grid.push_back(noise::DistortionSpec::parse(text));
  if (o.specs.empty() && o.kinds.empty()) {
    for (auto kind : noise::kAllKinds) {
      auto g = training::resolve_grid(config, kind);
      grid.insert(grid.end(), g.begin(), g.end());
    }
  }
  for (const auto& name : o.kinds) {
    auto g = training::resolve_grid(config, noise::parse_kind(name));
    grid.insert(grid.end(), g.begin(), g.end());
  }
  auto report = training::evaluate_sweep(model, load_dataset(o.data, config), grid, o.seed.value_or(config.seed),
                                         o.batch_size);
  report.metadata.checkpoint_id = fs::path(o.checkpoint).filename().string();
  if (!o.out.empty()) write_text(o.out, training::to_csv(report));
  out << training::render_tables(report);
  return kSuccess;
}

struct AblateOptions {
  ConfigOptions config;
  std::string data;
  std::string block = "lceb";
  std::string out;
};

int cmd_ablate(const AblateOptions& o, std::ostream& out, std::ostream& err) {
  const auto config = resolve_config(o.config);
  log_config(err, config);
  const auto which = o.block == "feb" ? training::Ablation::feb : training::Ablation::lceb;
  const auto every = std::max<int64_t>(1, config.log_every);
  auto report = training::ablate(config, load_dataset(o.data, config), which,
                                 [&](const std::string& name, const training::StepResult& r) {
                                   if ((r.step + 1) % every == 0) err << name << ' ' << training::format_step(r) << '\n';
                                 });
  const auto text = training::render_ablation(report);
  if (!o.out.empty()) write_text(o.out, text);
  out << text;
  return kSuccess;
}

int cmd_report(const std::string& csv, std::ostream& out) {
  out << training::render_tables(training::parse_csv(read_text(csv)));
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Invisible image watermarking with window-attention encoder and decoder networks", "swinmark");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  std::function<int()> action;

  TrainOptions train;
  auto* c_train = app.add_subcommand("train", "Train one specialist model");
  add_config_options(*c_train, train.config);
  c_train->add_option("--data", train.data, "Directory of training images");
  c_train->add_option("--distortion", train.distortion, "Training distortion: a kind name or kind:params");
  c_train->add_option("--out", train.out, "Final checkpoint path")->required();
  c_train->add_option("--checkpoint-dir", train.checkpoint_dir, "Directory for periodic checkpoints");
  c_train->add_option("--resume", train.resume, "Continue from this checkpoint");
  c_train->callback([&] { action = [&] { return cmd_train(train, out, err); }; });

  EmbedOptions embed;
  auto* c_embed = app.add_subcommand("embed", "Embed a message into an image");
  c_embed->add_option("--checkpoint", embed.checkpoint)->required();
  c_embed->add_option("--in", embed.input, "Cover image")->required();
  c_embed->add_option("--out", embed.out, "Watermarked image (PNG)")->required();
  auto* hex = c_embed->add_option("--message", embed.message_hex, "Message as L/4 hex digits");
  c_embed->add_option("--bits", embed.message_bits, "Message as L characters of 0/1")->excludes(hex);
  c_embed->add_option("--seed", embed.seed, "Seed for a random message");
  c_embed->add_flag("--lossy", embed.lossy, "Allow a lossy output format");
  c_embed->callback([&] { action = [&] { return cmd_embed(embed, out, err); }; });

  ExtractOptions extract;
  auto* c_extract = app.add_subcommand("extract", "Decode the message from an image");
  c_extract->add_option("--checkpoint", extract.checkpoint)->required();
  c_extract->add_option("--in", extract.input, "Watermarked (possibly attacked) image")->required();
  c_extract->add_option("--truth", extract.truth, "Sidecar written by embed; reports bit accuracy");
  c_extract->add_flag("--json", extract.as_json, "Print JSON");
  c_extract->callback([&] { action = [&] { return cmd_extract(extract, out, err); }; });

  AttackOptions attack;
  auto* c_attack = app.add_subcommand("attack", "Apply one distortion to an image");
  c_attack->add_option("--spec", attack.spec, "kind[:params], e.g. jpeg:50 or affine:10,0.1,0.7,30")->required();
  c_attack->add_option("--in", attack.input)->required();
  c_attack->add_option("--cover", attack.cover, "Cover image (cropout, dropout)");
  c_attack->add_option("--out", attack.out)->required();
  c_attack->add_option("--seed", attack.seed);
  c_attack->add_flag("--lossy", attack.lossy, "Allow a lossy output format");
  c_attack->callback([&] { action = [&] { return cmd_attack(attack, out, err); }; });

  EvaluateOptions evaluate;
  auto* c_eval = app.add_subcommand("evaluate", "Sweep distortion strengths and report PSNR / accuracy");
  c_eval->add_option("--checkpoint", evaluate.checkpoint)->required();
  c_eval->add_option("--data", evaluate.data, "Directory of test images");
  c_eval->add_option("--kind", evaluate.kinds, "Distortion kind to sweep (repeatable; default all)");
  c_eval->add_option("--spec", evaluate.specs, "Explicit kind:params entry (repeatable)");
  c_eval->add_option("--out", evaluate.out, "CSV output path");
  c_eval->add_option("--seed", evaluate.seed);
  c_eval->add_option("--batch", evaluate.batch_size)->check(CLI::PositiveNumber);
  c_eval->callback([&] { action = [&] { return cmd_evaluate(evaluate, out, err); }; });

  AblateOptions ablate;
  auto* c_ablate = app.add_subcommand("ablate", "Train the full model and one ablated variant");
  add_config_options(*c_ablate, ablate.config);
  c_ablate->add_option("--data", ablate.data, "Directory of training images");
  c_ablate->add_option("--block", ablate.block, "Block to remove")->check(CLI::IsMember({"lceb", "feb"}));
  c_ablate->add_option("--out", ablate.out, "Write the comparison table here");
  c_ablate->callback([&] { action = [&] { return cmd_ablate(ablate, out, err); }; });

  std::string csv;
  auto* c_report = app.add_subcommand("report", "Render a sweep CSV as aligned tables");
  c_report->add_option("csv", csv, "CSV written by evaluate")->required();
  c_report->callback([&] { action = [&] { return cmd_report(csv, out); }; });

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    return action();
  } catch (const training::NonFiniteLoss& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const c10::Error& e) {
    err << "error: " << e.what_without_backtrace() << '\n';
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace swinmark::cli
