#include <iostream>
#include <string>
#include <vector>

#include "ctcount/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ctcount::run_cli(args, std::cout, std::cerr);
}
