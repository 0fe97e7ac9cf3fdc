#include <iostream>

#include "sci/cli.hpp"

int main(int argc, char** argv) { return sci::run_cli(argc, argv, std::cout, std::cerr); }
