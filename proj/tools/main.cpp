#include <iostream>

#include "supplyscan/cli.hpp"

int main(int argc, char** argv) { return supplyscan::cli::run(argc, argv, std::cout, std::cerr); }
