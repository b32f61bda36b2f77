#include "slgen/cli.hpp"

int main(int argc, char** argv) { return slgen::cli::run(argc, argv); }
