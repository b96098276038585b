#include <string>
#include <vector>

#include "hhn/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return hhn::run_command(args);
}
