#include <iostream>

#include "kkmcut/cli.hpp"

int main(int argc, char** argv) {
    return kkmcut::cli::run(argc, argv, std::cout, std::cerr);
}
