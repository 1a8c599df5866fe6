#include "acase/cli.hpp"

int main(int argc, char** argv) { return acase::cli::run_cli(argc, argv); }
