#include "carl/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return carl::run_cli(argc, argv, std::cout, std::cerr); }
