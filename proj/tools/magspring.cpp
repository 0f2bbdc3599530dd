#include "magspring/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return magspring::run_cli(argc, argv, std::cout, std::cerr); }
