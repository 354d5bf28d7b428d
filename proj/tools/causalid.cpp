#include <iostream>

#include "causalid/cli.hpp"

int main(int argc, char** argv) { return causalid::run_cli(argc, argv, std::cout, std::cerr); }
