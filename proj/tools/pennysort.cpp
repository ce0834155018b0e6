#include <chrono>
#include <iostream>
#include <string>
#include <vector>

#include "pennysort/cli.hpp"

int main(int argc, char** argv)
{
    const auto start = std::chrono::steady_clock::now();
    std::ios::sync_with_stdio(false);
    const std::vector<std::string> args(argv + 1, argv + argc);
    const int rc = pennysort::run_cli(args, std::cout, std::cerr, start);
    std::cout.flush();
    return rc;
}
