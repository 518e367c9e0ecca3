#include <string>
#include <vector>

#include "turnkan/experiment/cli.hpp"

int main(int argc, char** argv) {
  return turnkan::exp::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
