#include <iostream>

#include "ttp/cli.hpp"

int main(int argc, char** argv) { return ttp::cli::run(argc, argv, std::cout, std::cerr); }
