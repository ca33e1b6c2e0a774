// Copyright 2026 The swinmark Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <string>
#include <vector>

#include "swinmark/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return swinmark::cli::run(args, std::cout, std::cerr);
}
