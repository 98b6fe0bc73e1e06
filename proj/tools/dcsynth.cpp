#include <iostream>

#include "dcsynth/cli.hpp"

int main(int argc, char** argv) { return dcsynth::cli::run(argc, argv, std::cout, std::cerr); }
