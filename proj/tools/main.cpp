#include <iostream>

#include "p3o/cli.hpp"

int main(int argc, char** argv) { return p3o::run_cli(argc, argv, std::cout, std::cerr); }
