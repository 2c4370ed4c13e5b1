#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return dsgp4kit::cli::run(argc, argv, std::cout, std::cerr); }
