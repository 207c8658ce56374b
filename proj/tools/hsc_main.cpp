#include <iostream>

#include "hsc/cli.hpp"

int main(int argc, char** argv) { return hsc::run_cli(argc, argv, std::cout, std::cerr); }
