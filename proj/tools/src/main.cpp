#include <iostream>

#include "promptpack/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return promptpack::cli::run(args, std::cout, std::cerr);
}
