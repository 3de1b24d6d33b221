#include <iostream>

#include "a2c/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return a2c::execute_command(args, std::cout, std::cerr);
}
