#include <docflow/cli.hpp>

#include <iostream>

int main(int argc, char** argv) { return docflow::run_cli(argc, argv, std::cout, std::cerr); }
