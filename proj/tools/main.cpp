#include "privscore/cli.hpp"

int main(int argc, char** argv) { return privscore::run_cli(argc, argv); }
