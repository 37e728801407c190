#include <iostream>
#include <string>
#include <vector>

#include "sciforge/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return sciforge::cli::run(args, std::cout);
}
