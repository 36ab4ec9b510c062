#include "pfqr_cli/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return pfqr::cli::run(argc, argv, std::cout, std::cerr); }
