#include "flair/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return flair::cli::run(argc, argv, std::cout, std::cerr); }
