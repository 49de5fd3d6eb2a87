#include <iostream>

#include "toda/cli.hpp"

int main(int argc, char **argv)
{
    toda::RunConfig cfg;
    if (auto code = toda::parse_args(argc, argv, cfg, std::cout, std::cerr))
        return *code;
    return toda::run(cfg, std::cout, std::cerr);
}
