#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  return embedmap::cli::Run(argc, argv, std::cout, std::cerr);
}
