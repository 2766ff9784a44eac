#include "exlab/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return exlab::cli::main(argc, argv, std::cout, std::cerr); }
