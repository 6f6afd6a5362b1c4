#include <iostream>

#include "phasekit/cli.hpp"

int main(int argc, char** argv) {
  return phasekit::cli::run(argc, argv, std::cout, std::cerr);
}
