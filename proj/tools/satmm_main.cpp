#include <iostream>

#include "satmm/cli.hpp"

int main(int argc, char** argv) {
  return satmm::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
