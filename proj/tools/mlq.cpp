#include <iostream>

#include "mlq/cli.hpp"

int main(int argc, char** argv) { return mlq::run_command(argc, argv, std::cout, std::cerr); }
