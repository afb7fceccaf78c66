#include <iostream>
#include <string>
#include <vector>

#include "mbrl/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mbrl::run_cli(args, std::cout, std::cerr);
}
