#include "openden/cli/commands.hpp"

int main(int argc, char** argv) { return openden::cli::run_cli(argc, argv); }
