#include "rispm/cli.hpp"

int main(int argc, char** argv) { return rispm::run_cli(argc, argv); }
