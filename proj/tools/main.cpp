#include "stpod/cli.hpp"

int main(int argc, char** argv) { return stpod::cli::run(argc, argv); }
