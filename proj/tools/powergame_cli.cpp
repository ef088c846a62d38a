#include <iostream>

#include "powergame/cli.hpp"

int main(int argc, char** argv) { return pg::run_cli(argc, argv, std::cout, std::cerr); }
