#include <vector>

#include "rrnlab/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return rrnlab::run_cli(args);
}
