// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <torch/types.h>

namespace swinmark::cli {

enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,
  kUsage = 2,
  kDataError = 3,
};

/// Runs one command line (`args[0]` is the program name) and returns the
/// process exit code. Regular output goes to `out`, logs and diagnostics to
/// `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Bits (0/1 tensor of length L) as hex, most significant bit first; L must
/// be a multiple of 4.
std::string bits_to_hex(const torch::Tensor& bits);
/// Parses a hex message into an [L] float tensor of 0/1. Throws DataError
/// when the digit count is not L / 4 or a character is not hex.
torch::Tensor hex_to_bits(std::string_view hex, int64_t length);
/// Bits as a string of '0' and '1'.
std::string bits_to_string(const torch::Tensor& bits);
/// Parses a '0'/'1' string of exactly `length` characters.
torch::Tensor string_to_bits(std::string_view text, int64_t length);

}  // namespace swinmark::cli
