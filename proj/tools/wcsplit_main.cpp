#include <iostream>

#include "wcsplit/cli.hpp"

int main(int argc, char** argv) { return wcsplit::cli_main(argc, argv, std::cout, std::cerr); }
