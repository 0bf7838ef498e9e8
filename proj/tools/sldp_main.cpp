#include <vector>

#include "sldp/cli.hpp"

int main(int argc, char** argv) {
  return sldp::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
