#include "mtlasso/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mtlasso::cli::dispatch(argc, argv, std::cout, std::cerr); }
