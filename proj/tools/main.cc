#include <iostream>
#include <string>
#include <vector>

#include "blockgnn/cli/app.h"
#include "blockgnn/runtime.h"

int main(int argc, char** argv) {
  blockgnn::ConfigureAllocator();
  std::vector<std::string> args(argv + 1, argv + argc);
  return blockgnn::cli::Run(args, std::cout, std::cerr);
}
