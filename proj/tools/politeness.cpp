#include <iostream>

#include "polite/cli.hpp"

int main(int argc, char** argv) { return polite::run_cli(argc, argv, std::cout, std::cerr); }
