#include <iostream>

#include "manet/cli.hpp"

int
main(int argc, char** argv)
{
    return manet::cli_main(argc, argv, std::cout, std::cerr);
}
