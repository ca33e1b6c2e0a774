// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <torch/torch.h>

#include "swinmark/errors.hpp"
#include "swinmark/noise.hpp"

namespace swinmark::noise {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::array<std::string_view, 11> kNames = {
    "identity", "gaussian_noise", "salt_pepper", "gaussian_blur", "median_blur", "jpeg",
    "cropout",  "dropout",        "rotation",    "scaling",       "affine"};

size_t param_count(Kind kind) {
  switch (kind) {
    case Kind::identity: return 0;
    case Kind::affine: return 4;
    default: return 1;
  }
}

bool is_integral(double v) { return std::isfinite(v) && std::floor(v) == v; }

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

std::string_view kind_name(Kind kind) { return kNames[static_cast<size_t>(kind)]; }

Kind parse_kind(std::string_view name) {
  for (size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<Kind>(i);
  }
  throw std::invalid_argument(fmt::format("unknown distortion kind '{}'", name));
}

bool is_geometric(Kind kind) {
  return kind == Kind::cropout || kind == Kind::dropout || kind == Kind::rotation ||
         kind == Kind::scaling || kind == Kind::affine;
}

bool needs_cover(Kind kind) { return kind == Kind::cropout || kind == Kind::dropout; }

Kind DistortionSpec::kind() const { return static_cast<Kind>(attack.index()); }

std::vector<double> DistortionSpec::params() const {
  return std::visit(
      overloaded{
          [](const Identity&) { return std::vector<double>{}; },
          [](const GaussianNoise& a) { return std::vector<double>{a.variance}; },
          [](const SaltPepper& a) { return std::vector<double>{a.ratio}; },
          [](const GaussianBlur& a) { return std::vector<double>{a.sigma}; },
          [](const MedianBlur& a) { return std::vector<double>{static_cast<double>(a.window)}; },
          [](const Jpeg& a) { return std::vector<double>{static_cast<double>(a.quality)}; },
          [](const Cropout& a) { return std::vector<double>{a.ratio}; },
          [](const Dropout& a) { return std::vector<double>{a.ratio}; },
          [](const Rotation& a) { return std::vector<double>{a.degrees}; },
          [](const Scaling& a) { return std::vector<double>{a.factor}; },
          [](const Affine& a) {
            return std::vector<double>{a.rotation_deg, a.translate, a.scale, a.shear_deg};
          },
      },
      attack);
}

void DistortionSpec::validate() const {
  const auto name = kind_name(kind());
  auto ratio_ok = [&](double r) {
    require(std::isfinite(r) && r >= 0 && r <= 1, fmt::format("{}: ratio must be in [0, 1], got {}", name, r));
  };
  std::visit(overloaded{
                 [](const Identity&) {},
                 [&](const GaussianNoise& a) {
                   require(std::isfinite(a.variance) && a.variance >= 0,
                           fmt::format("gaussian_noise: variance must be >= 0, got {}", a.variance));
                 },
                 [&](const SaltPepper& a) { ratio_ok(a.ratio); },
                 [&](const GaussianBlur& a) {
                   require(std::isfinite(a.sigma) && a.sigma >= 0 && a.sigma <= 64,
                           fmt::format("gaussian_blur: sigma must be in [0, 64], got {}", a.sigma));
                 },
                 [&](const MedianBlur& a) {
                   require(a.window >= 1 && a.window % 2 == 1 && a.window <= 31,
                           fmt::format("median_blur: window must be odd, got {}", a.window));
                 },
                 [&](const Jpeg& a) {
                   require(a.quality >= 1 && a.quality <= 100,
                           fmt::format("jpeg: quality must be in [1, 100], got {}", a.quality));
                 },
                 [&](const Cropout& a) { ratio_ok(a.ratio); },
                 [&](const Dropout& a) { ratio_ok(a.ratio); },
                 [&](const Rotation& a) {
                   require(std::isfinite(a.degrees), "rotation: angle must be finite");
                 },
                 [&](const Scaling& a) {
                   require(std::isfinite(a.factor) && a.factor > 0,
                           fmt::format("scaling: factor must be > 0, got {}", a.factor));
                 },
                 [&](const Affine& a) {
                   require(std::isfinite(a.rotation_deg) && std::isfinite(a.shear_deg),
                           "affine: angles must be finite");
                   require(std::abs(a.shear_deg) < 89, "affine: shear must be in (-89, 89) degrees");
                   require(std::isfinite(a.translate) && std::abs(a.translate) <= 1,
                           "affine: translation must be within [-1, 1]");
                   require(std::isfinite(a.scale) && a.scale > 0, "affine: scale must be > 0");
                 },
             },
             attack);
}

std::string DistortionSpec::strength() const {
  return fmt::format("{}", fmt::join(params(), ","));
}

std::string DistortionSpec::to_string() const {
  const auto s = strength();
  if (s.empty()) return std::string(kind_name(kind()));
  return fmt::format("{}:{}", kind_name(kind()), s);
}

DistortionSpec DistortionSpec::from_params(Kind kind, const std::vector<double>& p) {
  require(p.size() == param_count(kind),
          fmt::format("{} expects {} parameter(s), got {}", kind_name(kind), param_count(kind), p.size()));
  DistortionSpec spec;
  switch (kind) {
    case Kind::identity: spec.attack = Identity{}; break;
    case Kind::gaussian_noise: spec.attack = GaussianNoise{p[0]}; break;
    case Kind::salt_pepper: spec.attack = SaltPepper{p[0]}; break;
    case Kind::gaussian_blur: spec.attack = GaussianBlur{p[0]}; break;
    case Kind::median_blur:
      require(is_integral(p[0]), "median_blur: window must be an integer");
      spec.attack = MedianBlur{static_cast<int64_t>(p[0])};
      break;
    case Kind::jpeg:
      require(is_integral(p[0]), "jpeg: quality must be an integer");
      spec.attack = Jpeg{static_cast<int64_t>(p[0])};
      break;
    case Kind::cropout: spec.attack = Cropout{p[0]}; break;
    case Kind::dropout: spec.attack = Dropout{p[0]}; break;
    case Kind::rotation: spec.attack = Rotation{p[0]}; break;
    case Kind::scaling: spec.attack = Scaling{p[0]}; break;
    case Kind::affine: spec.attack = Affine{p[0], p[1], p[2], p[3]}; break;
  }
  spec.validate();
  return spec;
}

DistortionSpec DistortionSpec::parse(std::string_view text) {
  const auto colon = text.find(':');
  const auto kind = parse_kind(text.substr(0, colon));
  std::vector<double> values;
  if (colon != std::string_view::npos) {
    auto rest = text.substr(colon + 1);
    while (true) {
      const auto comma = rest.find(',');
      auto piece = rest.substr(0, comma);
      while (!piece.empty() && piece.front() == ' ') piece.remove_prefix(1);
      while (!piece.empty() && piece.back() == ' ') piece.remove_suffix(1);
      double v = 0;
      auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), v);
      require(ec == std::errc{} && ptr == piece.data() + piece.size() && !piece.empty(),
              fmt::format("cannot parse distortion parameter '{}' in '{}'", piece, text));
      values.push_back(v);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
  }
  return from_params(kind, values);
}

DistortionSpec sample_train_spec(Kind kind, Rng& rng) {
  switch (kind) {
    case Kind::identity: return {Identity{}};
    case Kind::gaussian_noise: return {GaussianNoise{rng.uniform(0.001, 0.04)}};
    case Kind::salt_pepper: return {SaltPepper{rng.uniform(0.001, 0.04)}};
    case Kind::gaussian_blur: return {GaussianBlur{2.0}};
    case Kind::median_blur: return {MedianBlur{7}};
    case Kind::jpeg: return {Jpeg{50}};
    case Kind::cropout: return {Cropout{0.4}};
    case Kind::dropout: return {Dropout{0.4}};
    case Kind::rotation: return {Rotation{rng.uniform(-30.0, 30.0)}};
    case Kind::scaling: return {Scaling{rng.uniform(0.7, 1.5)}};
    case Kind::affine: {
      const double rot = rng.uniform(-30.0, 30.0);
      const double shift = rng.uniform(0.0, 0.1);
      const double shear = rng.uniform(-30.0, 30.0);
      return {Affine{rot, shift, 0.7, shear}};
    }
  }
  throw std::logic_error("unreachable");
}

std::vector<DistortionSpec> test_grid(Kind kind) {
  auto scalar = [kind](std::initializer_list<double> values) {
    std::vector<DistortionSpec> out;
    for (double v : values) out.push_back(DistortionSpec::from_params(kind, {v}));
    return out;
  };
  switch (kind) {
    case Kind::identity: return {DistortionSpec{Identity{}}};
    case Kind::gaussian_noise: return scalar({0.01, 0.02, 0.03, 0.04, 0.05});
    case Kind::salt_pepper: return scalar({0.01, 0.02, 0.03, 0.04, 0.05});
    case Kind::gaussian_blur: return scalar({0.0001, 0.5, 1, 2});
    case Kind::median_blur: return scalar({3, 5, 7});
    case Kind::jpeg: return scalar({40, 50, 60, 70, 80, 90});
    case Kind::cropout: return scalar({0.1, 0.2, 0.3, 0.4, 0.5});
    case Kind::dropout: return scalar({0.2, 0.3, 0.4, 0.5, 0.6});
    case Kind::rotation: return scalar({-30, -15, 0, 15, 30});
    case Kind::scaling: return scalar({0.5, 0.7, 1, 1.5, 2});
    case Kind::affine:
      return {DistortionSpec{Affine{10, 0.1, 0.7, 30}}, DistortionSpec{Affine{0, 0.2, 0.7, 30}},
              DistortionSpec{Affine{0, 0.1, 0.6, 30}}, DistortionSpec{Affine{0, 0.1, 0.7, 20}}};
  }
  throw std::logic_error("unreachable");
}

torch::Tensor apply(const DistortionSpec& spec, const torch::Tensor& watermarked,
                    const torch::Tensor& cover, Rng& rng, QuantizationTape* tape) {
  spec.validate();
  if (watermarked.dim() != 4 || watermarked.size(1) != 3) {
    throw ShapeError("noise: expected watermarked image [B, 3, H, W]");
  }
  if (needs_cover(spec.kind()) && (!cover.defined() || cover.sizes() != watermarked.sizes())) {
    throw ShapeError(fmt::format("noise: {} needs a cover image of the watermarked shape", kind_name(spec.kind())));
  }
  return std::visit(
      overloaded{
          [&](const Identity&) { return watermarked; },
          [&](const GaussianNoise& a) { return gaussian_noise(watermarked, a.variance, rng); },
          [&](const SaltPepper& a) { return salt_pepper(watermarked, a.ratio, rng); },
          [&](const GaussianBlur& a) { return gaussian_blur(watermarked, a.sigma); },
          [&](const MedianBlur& a) { return median_blur(watermarked, a.window); },
          [&](const Jpeg& a) { return jpeg_sim(watermarked, a.quality, tape); },
          [&](const Cropout& a) { return cropout(watermarked, cover, a.ratio, rng); },
          [&](const Dropout& a) { return dropout(watermarked, cover, a.ratio, rng); },
          [&](const Rotation& a) { return rotate(watermarked, a.degrees); },
          [&](const Scaling& a) { return scale(watermarked, a.factor); },
          [&](const Affine& a) { return affine(watermarked, a); },
      },
      spec.attack);
}

}  // namespace swinmark::noise
