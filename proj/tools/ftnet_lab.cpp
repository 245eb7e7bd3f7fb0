#include <iostream>

#include "ftnet/cli.hpp"

int main(int argc, char** argv) { return ftnet::cli::run(argc, argv, std::cout, std::cerr); }
