#include <iostream>

#include "medres/cli/cli.h"

int main(int argc, char** argv) {
  return medres::cli::run(argc, argv, std::cout, std::cerr);
}
