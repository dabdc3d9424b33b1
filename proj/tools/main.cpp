#include "seisnoise/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return seisnoise::run_cli(argc, argv, std::cout, std::cerr); }
