// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#include <cctype>

#include <fmt/format.h>
#include <torch/torch.h>

#include "swinmark/cli.hpp"
#include "swinmark/errors.hpp"

namespace swinmark::cli {
namespace {

std::vector<int> to_ints(const torch::Tensor& bits) {
  auto flat = bits.detach().to(torch::kCPU).reshape({-1}).gt(0.5);
  std::vector<int> out(static_cast<size_t>(flat.numel()));
  auto a = flat.accessor<bool, 1>();
  for (int64_t i = 0; i < flat.numel(); ++i) out[static_cast<size_t>(i)] = a[i] ? 1 : 0;
  return out;
}

}  // namespace

std::string bits_to_hex(const torch::Tensor& bits) {
  const auto v = to_ints(bits);
  if (v.size() % 4 != 0) throw std::invalid_argument("hex form needs a bit count divisible by 4");
  std::string out;
  for (size_t i = 0; i < v.size(); i += 4) {
    const int nibble = v[i] << 3 | v[i + 1] << 2 | v[i + 2] << 1 | v[i + 3];
    out += "0123456789abcdef"[nibble];
  }
  return out;
}

torch::Tensor hex_to_bits(std::string_view hex, int64_t length) {
  if (length % 4 != 0) {
    throw DataError(fmt::format("a {}-bit message cannot be written in hex; pass --bits instead", length));
  }
  if (static_cast<int64_t>(hex.size()) * 4 != length) {
    throw DataError(fmt::format("message has {} hex digits ({} bits), the model embeds {} bits", hex.size(),
                                hex.size() * 4, length));
  }
  auto bits = torch::zeros({length});
  auto a = bits.accessor<float, 1>();
  for (size_t i = 0; i < hex.size(); ++i) {
    const auto c = static_cast<unsigned char>(hex[i]);
    if (!std::isxdigit(c)) throw DataError(fmt::format("'{}' is not a hex digit", hex[i]));
    const int nibble = std::isdigit(c) ? c - '0' : std::tolower(c) - 'a' + 10;
    for (int b = 0; b < 4; ++b) a[static_cast<int64_t>(i * 4 + b)] = static_cast<float>((nibble >> (3 - b)) & 1);
  }
  return bits;
}

std::string bits_to_string(const torch::Tensor& bits) {
  std::string out;
  for (int v : to_ints(bits)) out += v ? '1' : '0';
  return out;
}

torch::Tensor string_to_bits(std::string_view text, int64_t length) {
  if (static_cast<int64_t>(text.size()) != length) {
    throw DataError(fmt::format("message has {} bits, the model embeds {}", text.size(), length));
  }
  auto bits = torch::zeros({length});
  auto a = bits.accessor<float, 1>();
  for (size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '0' && text[i] != '1') throw DataError(fmt::format("'{}' is not a bit", text[i]));
    a[static_cast<int64_t>(i)] = text[i] == '1' ? 1.0f : 0.0f;
  }
  return bits;
}

}  // namespace swinmark::cli
