#include <iostream>
#include <string>
#include <vector>

#include "wtn/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return wtn::run_cli(args, std::cout, std::cerr);
}
