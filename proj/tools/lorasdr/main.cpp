#include <iostream>

#include "lorasdr/cli.hpp"

int main(int argc, char** argv) {
    return lorasdr::cli::run(argc, argv, std::cout, std::cerr);
}
