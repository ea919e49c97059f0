#include <iostream>
#include <string>
#include <vector>

#include "mtsim_tools/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mtsim::tools::run_command(args, std::cout, std::cerr);
}
