// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "fencer/cli.hpp"

int main(int argc, char** argv) { return fencer::cli_main(argc, argv, std::cout, std::cerr); }
