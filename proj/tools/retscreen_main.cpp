#include "retscreen/cli.hpp"

int main(int argc, char** argv) { return retscreen::cli::run_command(argc, argv); }
