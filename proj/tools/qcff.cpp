#include <iostream>

#include "qcff/cli/app.hpp"

int main(int argc, char **argv) { return qcff::cli::run(argc, argv, std::cout, std::cerr); }
