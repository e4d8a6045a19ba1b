#include <iostream>
#include <string>
#include <vector>

#include "lacclean/pipeline.hpp"

int main(int argc, char** argv)
{
  std::vector<std::string> args(argv + 1, argv + argc);
  return lacclean::run_cli(args, std::cout, std::cerr);
}
