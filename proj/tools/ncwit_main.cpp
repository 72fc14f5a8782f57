#include <iostream>
#include <string>
#include <vector>

#include "ncwit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ncwit::run_cli(args, std::cout, std::cerr);
}
