#include <cstdlib>

#include "scalemap/dispatch.hpp"

int main(int argc, char** argv) {
  return scalemap::cli::run(argc, argv, [](const char* name) { return std::getenv(name); });
}
