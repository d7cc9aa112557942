#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
    return screw_grasp::cli::run_cli(argc, argv, std::cout, std::cerr);
}
