// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#include "swinmark/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>

#include "swinmark/errors.hpp"
#include "swinmark/noise.hpp"

namespace swinmark {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

int64_t parse_int(std::string_view key, std::string_view v) {
  int64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError(fmt::format("config key '{}': expected integer, got '{}'", key, v));
  }
  return out;
}

uint64_t parse_uint(std::string_view key, std::string_view v) {
  uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError(fmt::format("config key '{}': expected unsigned integer, got '{}'", key, v));
  }
  return out;
}

double parse_real(std::string_view key, std::string_view v) {
  double out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(fmt::format("config key '{}': expected real number, got '{}'", key, v));
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(fmt::format("config key '{}': expected true/false, got '{}'", key, v));
}

std::string format_real(double v) { return fmt::format("{}", v); }

struct Field {
  std::string_view key;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
  bool architecture;
};

#define SWINMARK_INT(name, arch)                                                     \
  Field {                                                                            \
    #name, [](ExperimentConfig& c, std::string_view v) { c.name = parse_int(#name, v); }, \
        [](const ExperimentConfig& c) { return std::to_string(c.name); }, arch         \
  }
#define SWINMARK_REAL(name)                                                           \
  Field {                                                                             \
    #name, [](ExperimentConfig& c, std::string_view v) { c.name = parse_real(#name, v); }, \
        [](const ExperimentConfig& c) { return format_real(c.name); }, false            \
  }
#define SWINMARK_BOOL(name)                                                           \
  Field {                                                                             \
    #name, [](ExperimentConfig& c, std::string_view v) { c.name = parse_bool(#name, v); }, \
        [](const ExperimentConfig& c) { return std::string(c.name ? "true" : "false"); }, true \
  }
#define SWINMARK_STRING(name)                                                     \
  Field {                                                                         \
    #name, [](ExperimentConfig& c, std::string_view v) { c.name = std::string(v); }, \
        [](const ExperimentConfig& c) { return c.name; }, false                     \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      SWINMARK_INT(height, true),
      SWINMARK_INT(width, true),
      SWINMARK_INT(message_bits, true),
      SWINMARK_INT(patch, true),
      SWINMARK_INT(channels, true),
      SWINMARK_INT(stages, true),
      SWINMARK_INT(window, true),
      SWINMARK_INT(heads, true),
      SWINMARK_INT(diffusion_len, true),
      SWINMARK_INT(diffusion_side, true),
      SWINMARK_INT(message_channels, true),
      SWINMARK_INT(fetb_depth, true),
      SWINMARK_INT(mlp_ratio, true),
      SWINMARK_INT(lce_expansion, true),
      SWINMARK_BOOL(use_lceb),
      SWINMARK_BOOL(use_feb),
      SWINMARK_REAL(lambda_image),
      SWINMARK_REAL(lambda_message),
      SWINMARK_REAL(lambda_constraint),
      SWINMARK_REAL(lr_start),
      SWINMARK_REAL(lr_end),
      SWINMARK_INT(steps, false),
      SWINMARK_INT(batch_size, false),
      SWINMARK_REAL(weight_decay),
      SWINMARK_REAL(beta1),
      SWINMARK_REAL(beta2),
      SWINMARK_REAL(grad_clip),
      SWINMARK_INT(log_every, false),
      SWINMARK_INT(checkpoint_every, false),
      SWINMARK_STRING(train_distortion),
      SWINMARK_STRING(dataset),
      SWINMARK_STRING(dataset_id),
      Field{"seed",
            [](ExperimentConfig& c, std::string_view v) { c.seed = parse_uint("seed", v); },
            [](const ExperimentConfig& c) { return std::to_string(c.seed); }, false},
  };
  return table;
}

#undef SWINMARK_INT
#undef SWINMARK_REAL
#undef SWINMARK_BOOL
#undef SWINMARK_STRING

constexpr std::string_view kGridPrefix = "grid.";

std::vector<std::string> split_strengths(std::string_view v) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= v.size()) {
    const auto end = v.find(';', start);
    const auto piece = trim(v.substr(start, end == std::string_view::npos ? v.npos : end - start));
    if (!piece.empty()) out.emplace_back(piece);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults() { return ExperimentConfig{}; }

ExperimentConfig ExperimentConfig::tiny() {
  ExperimentConfig c;
  c.height = 16;
  c.width = 16;
  c.patch = 2;
  c.channels = 8;
  c.stages = 1;
  c.window = 2;
  c.heads = 2;
  c.message_bits = 8;
  c.diffusion_len = 16;
  c.diffusion_side = 4;
  c.message_channels = 4;
  c.batch_size = 8;
  return c;
}

int64_t ExperimentConfig::grid_rows(int64_t stage) const {
  return height / (patch << stage);
}

int64_t ExperimentConfig::grid_cols(int64_t stage) const {
  return width / (patch << stage);
}

int64_t ExperimentConfig::stage_channels(int64_t stage) const { return channels << stage; }

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("invalid config: " + what); };
  if (height <= 0 || width <= 0) fail("height and width must be positive");
  if (message_bits <= 0) fail("message_bits must be positive");
  if (patch <= 0) fail("patch must be positive");
  if (channels <= 0) fail("channels must be positive");
  if (stages < 1 || stages > 8) fail("stages must be in [1, 8]");
  if (window <= 0) fail("window must be positive");
  if (heads <= 0) fail("heads must be positive");
  if (message_channels <= 0) fail("message_channels must be positive");
  if (fetb_depth < 0) fail("fetb_depth must be non-negative");
  if (mlp_ratio <= 0 || lce_expansion <= 0) fail("mlp_ratio and lce_expansion must be positive");

  const int64_t unit = patch << stages;
  if (height % unit != 0 || width % unit != 0) {
    fail(fmt::format("height {} and width {} must be multiples of patch * 2^stages = {}", height,
                     width, unit));
  }
  const int64_t rows = grid_rows(stages);
  const int64_t cols = grid_cols(stages);
  if (rows < window || cols < window || rows % window != 0 || cols % window != 0) {
    fail(fmt::format("bottleneck token grid {}x{} must be a multiple of window {}", rows, cols,
                     window));
  }
  if (diffusion_side <= 0 || diffusion_side * diffusion_side != diffusion_len) {
    fail(fmt::format("diffusion_side^2 ({}^2) must equal diffusion_len ({})", diffusion_side,
                     diffusion_len));
  }
  const int64_t p2 = patch * patch;
  for (int64_t s = 0; s <= stages; ++s) {
    const int64_t dim = p2 * stage_channels(s);
    if (dim % heads != 0) fail(fmt::format("heads {} must divide token width {}", heads, dim));
    if (s < stages) {
      const int64_t up_dim = p2 * (2 * stage_channels(s) + message_channels);
      if (up_dim % heads != 0) {
        fail(fmt::format("heads {} must divide up-stage token width {}", heads, up_dim));
      }
    }
  }
  if (!(lambda_image > 0 && lambda_message > 0 && lambda_constraint > 0)) {
    fail("loss weights must be strictly positive");
  }
  if (!(lr_end > 0 && lr_start >= lr_end)) fail("need lr_start >= lr_end > 0");
  if (steps <= 0) fail("steps must be positive");
  if (batch_size <= 0) fail("batch_size must be positive");
  if (weight_decay < 0) fail("weight_decay must be non-negative");
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1)) fail("betas must be in [0, 1)");
  if (grad_clip < 0) fail("grad_clip must be non-negative");
  if (log_every < 0 || checkpoint_every < 0) fail("log/checkpoint intervals must be >= 0");
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream out;
  for (const auto& f : fields()) out << f.key << " = " << f.get(*this) << '\n';
  for (const auto& [kind, strengths] : grids) {
    out << kGridPrefix << kind << " =";
    for (size_t i = 0; i < strengths.size(); ++i) out << (i ? "; " : " ") << strengths[i];
    out << '\n';
  }
  return out.str();
}

std::string ExperimentConfig::architecture_text() const {
  std::ostringstream out;
  for (const auto& f : fields()) {
    if (f.architecture) out << f.key << " = " << f.get(*this) << '\n';
  }
  return out.str();
}

std::string ExperimentConfig::hash() const {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : to_text()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return fmt::format("{:016x}", h);
}

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key.starts_with(kGridPrefix)) {
    const auto kind = key.substr(kGridPrefix.size());
    if (kind.empty()) throw ConfigError("config key 'grid.' needs a distortion kind");
    auto strengths = split_strengths(value);
    try {
      noise::parse_kind(kind);
      for (const auto& s : strengths) {
        noise::DistortionSpec::parse(s.empty() ? std::string(kind) : fmt::format("{}:{}", kind, s));
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError(fmt::format("config key '{}': {}", key, e.what()));
    }
    grids[std::string(kind)] = std::move(strengths);
    return;
  }
  for (const auto& f : fields()) {
    if (f.key == key) {
      f.set(*this, value);
      return;
    }
  }
  throw ConfigError(fmt::format("unknown config key '{}'", key));
}

std::pair<std::string, std::string> split_assignment(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError(fmt::format("expected key=value, got '{}'", assignment));
  }
  return {std::string(trim(assignment.substr(0, eq))), std::string(trim(assignment.substr(eq + 1)))};
}

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  ExperimentConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    try {
      auto [key, value] = split_assignment(view);
      cfg.set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("line {}: {}", lineno, e.what()));
    }
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

void ExperimentConfig::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write config file '{}'", path.string()));
  out << to_text();
}

}  // namespace swinmark
