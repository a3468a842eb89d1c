#include <iostream>

#include "panelecm/cli/commands.hpp"

int main(int argc, char** argv) { return panelecm::cli::run_cli(argc, argv, std::cout, std::cerr); }
