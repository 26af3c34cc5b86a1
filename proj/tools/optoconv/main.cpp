#include "optoconv/commands.hpp"

int main(int argc, char** argv) {
  return optoconv::cli::run_cli(argc, argv);
}
