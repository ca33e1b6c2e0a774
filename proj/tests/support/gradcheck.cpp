// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#include "support/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <torch/torch.h>

#include "swinmark/networks.hpp"
#include "swinmark/objectives.hpp"
#include "swinmark/rng.hpp"

namespace swinmark::testing {

double relative_error(double analytic, double numeric) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  return scale == 0 ? 0.0 : std::abs(analytic - numeric) / scale;
}

torch::Tensor numeric_gradient(const std::function<torch::Tensor(const torch::Tensor&)>& f,
                               const torch::Tensor& x, double step) {
  torch::NoGradGuard no_grad;
  auto point = x.detach().clone();
  auto flat = point.view({-1});
  auto grad = torch::zeros({flat.numel()}, torch::kFloat64);
  for (int64_t i = 0; i < flat.numel(); ++i) {
    const double original = flat[i].item<double>();
    flat[i] = original + step;
    const double up = f(point).item<double>();
    flat[i] = original - step;
    const double down = f(point).item<double>();
    flat[i] = original;
    grad[i] = (up - down) / (2 * step);
  }
  return grad.view(x.sizes());
}

double ModelGradientCheck::max_relative_error() const {
  double worst = 0;
  for (const auto& c : checks) worst = std::max(worst, c.relative_error);
  return worst;
}

ModelGradientCheck check_model_gradients(const ExperimentConfig& config, const noise::DistortionSpec& spec,
                                         int count, uint64_t seed, double step, double floor) {
  Rng init(seed);
  nets::WatermarkModel model(config, init);
  Rng data(seed + 1);
  const int64_t batch = 2;
  auto cover = torch::rand({batch, 3, config.height, config.width}, data.generator());
  auto message = sample_message(batch, config.message_bits, data);
  const objectives::LossWeights weights{config.lambda_image, config.lambda_message, config.lambda_constraint};

  noise::QuantizationTape tape;
  auto loss = [&]() {
    Rng noise_rng(seed + 2);
    tape.cursor = 0;
    auto watermarked = model->encode(cover, message);
    auto noised = noise::apply(spec, watermarked, cover, noise_rng, &tape);
    auto logits = model->decode(noised);
    // Accumulate the objective in double so only the network itself runs in float32.
    return objectives::total_loss(cover.to(torch::kFloat64), watermarked.to(torch::kFloat64),
                                  message.to(torch::kFloat64), logits.to(torch::kFloat64), weights)
        .total;
  };

  model->zero_grad();
  loss().backward();
  tape.replay = true;

  auto named = model->named_parameters();
  double largest = 0;
  for (const auto& item : named) {
    if (item.value().grad().defined()) largest = std::max(largest, item.value().grad().abs().max().item<double>());
  }
  struct Candidate {
    size_t param;
    int64_t index;
  };
  std::vector<Candidate> candidates;
  for (size_t p = 0; p < named.size(); ++p) {
    const auto& grad = named[p].value().grad();
    if (!grad.defined()) continue;
    auto idx = torch::nonzero(grad.reshape({-1}).abs() >= floor * largest).reshape({-1});
    auto acc = idx.accessor<int64_t, 1>();
    for (int64_t i = 0; i < idx.size(0); ++i) candidates.push_back({p, acc[i]});
  }

  Rng pick(seed + 3);
  std::set<size_t> chosen;
  const auto wanted = std::min<size_t>(static_cast<size_t>(count), candidates.size());
  while (chosen.size() < wanted) {
    chosen.insert(static_cast<size_t>(pick.uniform_int(0, static_cast<int64_t>(candidates.size()) - 1)));
  }

  ModelGradientCheck result;
  torch::NoGradGuard no_grad;
  for (auto c : chosen) {
    const auto& [p, index] = candidates[c];
    auto param = named[p].value();
    auto flat = param.detach().view({-1});
    const double analytic = param.grad().reshape({-1})[index].item<double>();
    const auto original = flat[index].clone();
    flat[index] = original + step;
    const double high = flat[index].item<double>();
    const double up = loss().item<double>();
    flat[index] = original - step;
    const double low = flat[index].item<double>();
    const double down = loss().item<double>();
    flat[index] = original;
    // divide by the perturbation actually representable in float32
    const double numeric = (up - down) / (high - low);
    result.checks.push_back({named[p].key(), index, analytic, numeric, relative_error(analytic, numeric)});
  }
  return result;
}

}  // namespace swinmark::testing
