#include <vector>

#include "uclab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return uclab::run_cli(args);
}
