#include "avlab/cli.hpp"

int main(int argc, char** argv) { return avlab::run_cli(argc, argv); }
