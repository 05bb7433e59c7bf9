#include <string>
#include <vector>

#include "ugp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return ugp::cli::run(args);
}
