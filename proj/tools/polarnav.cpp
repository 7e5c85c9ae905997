#include "polarnav/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return polarnav::cli::run(argc, argv, std::cout, std::cerr); }
