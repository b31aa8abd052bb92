#include "exitmoments/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return exitmoments::cli::run(argc, argv, std::cout, std::cerr);
}
