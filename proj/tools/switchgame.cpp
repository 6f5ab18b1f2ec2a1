#include "switchgame/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return switchgame::cli::run(argc, argv, std::cerr); }
