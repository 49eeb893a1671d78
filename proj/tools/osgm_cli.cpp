#include <iostream>

#include "osgm/cli.hpp"

int main(int argc, char** argv) {
  return osgm::cli::run_cli(argc, argv, {std::cout, std::cerr});
}
