#include <iostream>
#include <string>
#include <vector>

#include "hpcserve/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  hpcserve::SystemProcessRunner runner;
  hpcserve::CliContext ctx{std::cout, std::cerr, runner};
  return hpcserve::dispatch(args, ctx);
}
