#include <iostream>

#include "stvs/cli.hpp"

int main(int argc, char** argv) {
    return stvs::cli::run(argc, argv, std::cout, std::cerr);
}
