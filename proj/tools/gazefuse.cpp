#include <iostream>

#include "gazefuse/cli/commands.hpp"

int main(int argc, char** argv) {
  return gazefuse::cli::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
