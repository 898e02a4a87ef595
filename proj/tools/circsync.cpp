#include "circsync/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return circsync::cli::main_entry(argc, argv, std::cout, std::cerr); }
