#include <iostream>

#include "ovm/gateway/cli.hpp"

int main(int argc, char** argv) {
  return ovm::gateway::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
