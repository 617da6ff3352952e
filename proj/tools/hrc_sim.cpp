#include "hrc/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return hrc::cli::run_cli(argc, argv, std::cout, std::cerr);
}
