#include "stx/cli.hpp"

int main(int argc, char** argv) { return stx::cli::run(argc, argv); }
