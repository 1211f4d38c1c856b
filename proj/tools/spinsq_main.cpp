#include "spinsq/cli.hpp"

int main(int argc, char** argv) { return spinsq::run_cli(argc, argv); }
