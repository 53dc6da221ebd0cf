#include "viewsynth/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return viewsynth::run_cli(argc, argv, std::cout, std::cerr);
}
