#include <iostream>

#include "kpkvb/cli.hpp"

int main(int argc, char** argv) { return kpkvb::run_cli(argc, argv, std::cout, std::cerr); }
