#include <iostream>

#include "storesense/cli.hpp"

int main(int argc, char** argv) { return storesense::run_cli(argc, argv, std::cout, std::cerr); }
