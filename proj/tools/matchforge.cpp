#include "matchforge/cli.hpp"

int main(int argc, char** argv) { return matchforge::cli::run_cli(argc, argv); }
