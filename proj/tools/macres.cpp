#include <iostream>

#include "macres/cli.hpp"

int main(int argc, char** argv) { return macres::run_cli(argc, argv, std::cout, std::cerr); }
