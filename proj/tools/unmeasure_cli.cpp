#include <iostream>

#include "unmeasure/cli.hpp"

int main(int argc, char** argv) { return unmeasure::cli::run(argc, argv, std::cout, std::cerr); }
