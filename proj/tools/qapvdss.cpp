#include <iostream>

#include "qapvdss/cli.hpp"

int main(int argc, char** argv) { return qapvdss::cli::run(argc, argv, std::cout, std::cerr); }
