#include <iostream>

#include "stagesta/report_cli.hpp"

int main(int argc, char** argv) { return stagesta::run_cli(argc, argv, std::cout, std::cerr); }
