#include <iostream>

#include "hmrf_cli/commands.hpp"

int main(int argc, char** argv) { return hmrf::cli::run(argc, argv, std::cout, std::cerr); }
