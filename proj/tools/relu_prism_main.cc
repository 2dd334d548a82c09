#include <iostream>
#include <string>
#include <vector>

#include "relu_prism/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return relu_prism::cli::run(args, std::cout, std::cerr);
}
