#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "minid/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::error_code ec;
  auto self = std::filesystem::read_symlink("/proc/self/exe", ec);
  return minid::cli::run_command(args, std::cout, std::cerr, ec ? std::string(argv[0]) : self.string());
}
