#include <string>
#include <vector>

#include "app.hpp"

int main(int argc, char** argv) {
  return bohmctx::cli::run_cli(std::vector<std::string>(argv, argv + argc));
}
