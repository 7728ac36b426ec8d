#include <iostream>

#include "resflow/cli.hpp"

int main(int argc, char** argv) {
    return resflow::run_cli(argc, argv, std::cout, std::cerr);
}
