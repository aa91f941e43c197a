#include "copula/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return copula::cli::run(argc, argv, std::cout, std::cerr); }
