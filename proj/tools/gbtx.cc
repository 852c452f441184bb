#include <iostream>
#include <string>
#include <vector>

#include "gbtx/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return gbtx::cli::Run(args, std::cout, std::cerr);
}
