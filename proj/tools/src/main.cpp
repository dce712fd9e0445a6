#include "commands.hpp"

int main(int argc, char** argv) { return klcpd::cli::run_cli(argc, argv); }
