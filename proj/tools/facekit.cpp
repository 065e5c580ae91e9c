#include <iostream>
#include <string>
#include <vector>

#include "facekit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return facekit::cli::run(args, std::cout, std::cerr);
}
