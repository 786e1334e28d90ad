#include <iostream>
#include <string>
#include <vector>

#include "pas/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pas::cli::run_command(args, std::cout, std::cerr);
}
