#include "toruscope/cli.hpp"

int main(int argc, char** argv) { return toruscope::run_cli(argc, argv); }
