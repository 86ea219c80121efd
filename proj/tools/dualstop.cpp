#include <iostream>

#include "dualstop/cli.hpp"

int main(int argc, char** argv)
{
    return dualstop::cli_main(argc, argv, std::cout, std::cerr);
}
