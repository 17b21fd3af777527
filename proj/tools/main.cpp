#include <iostream>

#include "shape_rerank_cli/commands.hpp"

int main(int argc, char** argv) { return shape_rerank::cli::run_cli(argc, argv, std::cout, std::cerr); }
