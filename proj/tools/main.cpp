#include <iostream>

#include "seqgen_cli.hpp"

int main(int argc, char** argv) { return seqgen::cli::run(argc, argv, std::cout, std::cerr); }
