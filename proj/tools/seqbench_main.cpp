#include "seqbench/cli/cli.hpp"

int main(int argc, char** argv) { return seqbench::cli::run_cli(argc, argv); }
