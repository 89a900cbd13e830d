#include <iostream>

#include "uplink/cli.hpp"

int main(int argc, char** argv) { return uplink::cli::run(argc, argv, std::cout, std::cerr); }
