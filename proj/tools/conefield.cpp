#include <iostream>

#include "conefield/cli.hpp"

int main(int argc, char** argv) { return conefield::run_cli(argc, argv, std::cout, std::cerr); }
