#include <iostream>

#include "ucorrect/cli.hpp"

int main(int argc, char** argv) {
  return ucorrect::run_cli(argc, argv, std::cout, std::cerr);
}
