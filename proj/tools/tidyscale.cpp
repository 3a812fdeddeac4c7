#include <iostream>

#include "tidyscale/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return tidyscale::cli::main(args, std::cout, std::cerr);
}
