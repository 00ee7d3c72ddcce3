#include "relayharq/sweep.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return relayharq::run_cli(argc, argv, std::cout, std::cerr);
}
