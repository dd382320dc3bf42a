#include "commands.hpp"

int main(int argc, char** argv) { return blochreach::cli::run_cli(argc, argv); }
