#include "xdeval/cli_commands.hpp"

int main(int argc, char** argv) { return xdeval::cli::run_cli(argc, argv); }
