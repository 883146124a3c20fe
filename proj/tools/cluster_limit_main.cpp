#include <iostream>

#include "cluster_limit/cli.hpp"

int main(int argc, char** argv) {
    return cluster_limit::cli::run(argc, argv, std::cout, std::cerr);
}
