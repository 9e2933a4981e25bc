#include <iostream>

#include "stepdecay/cli.hpp"

int main(int argc, char** argv) { return stepdecay::run_cli(argc, argv, std::cout, std::cerr); }
