#include "radmark/cli/app.hpp"

#include <iostream>

int main(int argc, char** argv) { return radmark::cli::run(argc, argv, std::cout, std::cerr); }
