#include <iostream>
#include <string>
#include <vector>

#include "inflogic_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  auto result = inflogic::cli::run(args);
  std::cout << result.to_json().dump(2) << '\n';
  return result.exit_code;
}
