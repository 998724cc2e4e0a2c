#include "nfrl/cli.h"

#include <iostream>

int main(int argc, char** argv) { return nfrl::cli::run(argc, argv, std::cout, std::cerr); }
