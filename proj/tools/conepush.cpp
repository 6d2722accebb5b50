#include "conepush/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return conepush::run_cli(argc, argv, std::cout, std::cerr); }
