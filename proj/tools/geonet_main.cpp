#include <iostream>

#include "geonet/cli.hpp"

int main(int argc, char** argv) { return geonet::run_cli(argc, argv, std::cout, std::cerr); }
