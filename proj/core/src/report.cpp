// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "swinmark/errors.hpp"
#include "swinmark/training.hpp"

namespace swinmark::training {
namespace {

constexpr std::string_view kHeader = "kind,strength,psnr_db,acc_pct";

std::string_view title(noise::Kind kind) {
  switch (kind) {
    case noise::Kind::identity: return "No attack";
    case noise::Kind::gaussian_noise: return "Gaussian noise (variance)";
    case noise::Kind::salt_pepper: return "Salt & pepper noise (ratio)";
    case noise::Kind::gaussian_blur: return "Gaussian blur (sigma)";
    case noise::Kind::median_blur: return "Median blur (window)";
    case noise::Kind::jpeg: return "JPEG compression (quality)";
    case noise::Kind::cropout: return "Cropout (area ratio replaced by the cover)";
    case noise::Kind::dropout: return "Dropout (pixel ratio replaced by the cover)";
    case noise::Kind::rotation: return "Rotation (degrees, counter-clockwise)";
    case noise::Kind::scaling: return "Scaling (factor)";
    case noise::Kind::affine: return "Affine (rotation, translation, scale, shear)";
  }
  return "";
}

// Display width of UTF-8 text, one column per code point.
size_t display_width(std::string_view s) {
  return static_cast<size_t>(std::count_if(s.begin(), s.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  }));
}

std::string pad_left(std::string_view s, size_t width) {
  const auto w = display_width(s);
  return std::string(width > w ? width - w : 0, ' ') + std::string(s);
}

std::string pad_right(std::string_view s, size_t width) {
  const auto w = display_width(s);
  return std::string(s) + std::string(width > w ? width - w : 0, ' ');
}

double parse_number(std::string_view text, size_t line) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw DataError(fmt::format("csv line {}: '{}' is not a number", line, text));
  }
  return v;
}

std::vector<std::string> split_csv_line(std::string_view line, size_t number) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw DataError(fmt::format("csv line {}: unterminated quote", number));
  return fields;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string default_flag(bool is_default) { return is_default ? " (default)" : ""; }

void apply_metadata(SweepMetadata& m, std::string_view key, std::string_view value, size_t line) {
  if (key == "config_hash") m.config_hash = value;
  else if (key == "checkpoint") m.checkpoint_id = value;
  else if (key == "dataset") m.dataset_id = value;
  else if (key == "batch_size") m.batch_size = static_cast<int64_t>(parse_number(value, line));
  else if (key == "steps") m.steps = static_cast<int64_t>(parse_number(value, line));
  else if (key == "weight_decay") m.weight_decay = parse_number(value, line);
  else if (key == "seed") m.seed = static_cast<uint64_t>(parse_number(value, line));
}

}  // namespace

std::string strength_label(noise::Kind kind, const std::string& s) {
  using noise::Kind;
  switch (kind) {
    case Kind::identity: return "none";
    case Kind::gaussian_noise:
    case Kind::salt_pepper:
    case Kind::gaussian_blur: return "σ=" + s;
    case Kind::median_blur: return fmt::format("w={}×{}", s, s);
    case Kind::jpeg: return "QF=" + s;
    case Kind::cropout:
    case Kind::dropout:
    case Kind::scaling: return "r=" + s;
    case Kind::rotation: return "θ=" + s + "°";
    case Kind::affine: return "s=(" + s + ")";
  }
  return s;
}

std::string to_csv(const SweepReport& report) {
  const auto& m = report.metadata;
  std::string out;
  out += fmt::format("# config_hash: {}\n# checkpoint: {}\n# dataset: {}\n", m.config_hash, m.checkpoint_id,
                     m.dataset_id);
  out += fmt::format("# batch_size: {}\n# steps: {}\n# weight_decay: {}\n# seed: {}\n", m.batch_size, m.steps,
                     m.weight_decay, m.seed);
  out += std::string(kHeader) + "\n";
  for (const auto& r : report.rows) {
    out += fmt::format("{},{},{:.4f},{:.4f}\n", r.kind, csv_field(r.strength), r.psnr_db, r.acc_pct);
  }
  return out;
}

SweepReport parse_csv(const std::string& text) {
  SweepReport report;
  std::istringstream in(text);
  std::string line;
  size_t number = 0;
  bool seen_header = false;
  std::set<std::pair<std::string, std::string>> cells;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line.front() == '#') {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        auto key = line.substr(1, colon - 1);
        auto value = line.substr(colon + 1);
        key.erase(0, key.find_first_not_of(' '));
        value.erase(0, value.find_first_not_of(' '));
        apply_metadata(report.metadata, key, value, number);
      }
      continue;
    }
    if (!seen_header) {
      if (line != kHeader) throw DataError(fmt::format("csv line {}: expected header '{}'", number, kHeader));
      seen_header = true;
      continue;
    }
    auto fields = split_csv_line(line, number);
    if (fields.size() != 4) {
      throw DataError(fmt::format("csv line {}: expected 4 fields, got {}", number, fields.size()));
    }
    SweepRow row;
    row.kind = fields[0];
    row.strength = fields[1];
    try {
      const auto kind = noise::parse_kind(row.kind);
      noise::DistortionSpec::parse(row.strength.empty() ? row.kind : row.kind + ":" + row.strength);
      (void)kind;
    } catch (const std::invalid_argument& e) {
      throw DataError(fmt::format("csv line {}: {}", number, e.what()));
    }
    row.psnr_db = parse_number(fields[2], number);
    row.acc_pct = parse_number(fields[3], number);
    if (!cells.emplace(row.kind, row.strength).second) {
      throw DataError(fmt::format("csv line {}: duplicate cell {} {}", number, row.kind, row.strength));
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string render_tables(const SweepReport& report) {
  if (report.rows.empty()) return "";
  const auto& m = report.metadata;
  const auto defaults = ExperimentConfig::defaults();
  std::string out;
  out += fmt::format("# config {}  checkpoint {}  dataset {}  seed {}\n", m.config_hash.empty() ? "-" : m.config_hash,
                     m.checkpoint_id.empty() ? "-" : m.checkpoint_id, m.dataset_id.empty() ? "-" : m.dataset_id,
                     m.seed);
  out += fmt::format("# training: batch_size={}{}  steps={}{}  weight_decay={}{}\n", m.batch_size,
                     default_flag(m.batch_size == defaults.batch_size), m.steps,
                     default_flag(m.steps == defaults.steps), m.weight_decay,
                     default_flag(m.weight_decay == defaults.weight_decay));
  out += "# PSNR: RGB jointly, peak 1, 8-bit export vs cover, measured before the attack\n";
  out += "# ACC: bit accuracy after the attack; cropout r is the area fraction replaced by the cover\n";

  for (auto kind : noise::kAllKinds) {
    const auto name = std::string(noise::kind_name(kind));
    std::vector<const SweepRow*> rows;
    for (const auto& r : report.rows) {
      if (r.kind == name) rows.push_back(&r);
    }
    if (rows.empty()) continue;
    const bool scalar = std::none_of(rows.begin(), rows.end(),
                                     [](const SweepRow* r) { return r->strength.find(',') != std::string::npos; });
    if (scalar && kind != noise::Kind::identity) {
      std::stable_sort(rows.begin(), rows.end(), [](const SweepRow* a, const SweepRow* b) {
        return std::stod(a->strength) < std::stod(b->strength);
      });
    }
    const bool internal = std::all_of(rows.begin(), rows.end(),
                                      [](const SweepRow* r) { return r->internal_psnr_db.has_value(); });

    std::vector<std::string> labels;
    size_t width = 8;
    for (const auto* r : rows) {
      labels.push_back(strength_label(kind, r->strength));
      width = std::max(width, display_width(labels.back()));
    }
    const std::string psnr_name = "PSNR (dB)";
    const std::string internal_name = "PSNR float (dB)";
    const std::string acc_name = "ACC (%)";
    const size_t first = internal ? internal_name.size() : psnr_name.size();

    out += fmt::format("\n{} [{}]\n", title(kind), name);
    out += pad_right("", first);
    for (const auto& label : labels) out += "  " + pad_left(label, width);
    out += "\n" + pad_right(psnr_name, first);
    for (const auto* r : rows) out += "  " + pad_left(fmt::format("{:.2f}", r->psnr_db), width);
    if (internal) {
      out += "\n" + pad_right(internal_name, first);
      for (const auto* r : rows) out += "  " + pad_left(fmt::format("{:.2f}", *r->internal_psnr_db), width);
    }
    out += "\n" + pad_right(acc_name, first);
    for (const auto* r : rows) out += "  " + pad_left(fmt::format("{:.2f}", r->acc_pct), width);
    out += "\n";
  }
  return out;
}

std::string render_ablation(const AblationReport& report) {
  std::string out = fmt::format("{:<16}  {:>10}  {:>9}  {:>8}\n", "model", "params", "PSNR (dB)", "ACC (%)");
  for (const auto* row : {&report.baseline, &report.variant}) {
    out += fmt::format("{:<16}  {:>10}  {:>9.2f}  {:>8.2f}\n", row->name, row->parameters, row->psnr_db,
                       row->acc_pct);
  }
  out += fmt::format("{:<16}  {:>10}  {:>+9.2f}  {:>+8.2f}\n", "delta", report.baseline.parameters - report.variant.parameters,
                     report.delta_psnr_db(), report.delta_acc_pct());
  return out;
}

}  // namespace swinmark::training
