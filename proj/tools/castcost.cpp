#include <iostream>

#include "castcost/cli.hpp"

int main(int argc, char** argv) { return castcost::cli_main(argc, argv, std::cout, std::cerr); }
