#include "scorelab/cli.hpp"

int main(int argc, char** argv) { return scorelab::run_cli(argc, argv); }
