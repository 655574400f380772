#include <iostream>

#include "hwdyn/cli.hpp"

int main(int argc, char** argv) { return hwdyn::cli::run(argc, argv, std::cout, std::cerr); }
