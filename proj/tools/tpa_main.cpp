#include "tpa/cli.hpp"

int main(int argc, char** argv) { return tpa::cli::run(argc, argv); }
