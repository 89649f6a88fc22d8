#include <string>
#include <vector>

#include <loopfact/cli_app.hpp>

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return loopfact::run_cli(std::move(args));
}
