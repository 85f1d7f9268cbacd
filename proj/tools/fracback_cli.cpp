#include "fracback/cli.hpp"

int main(int argc, char** argv) {
  return fracback::cli_main(argc, argv);
}
