#include <iostream>

#include "crashrepro_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return crashrepro::cli::run(args, std::cout, std::cerr);
}
