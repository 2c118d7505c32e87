#include "hisp/cli.hpp"

int main(int argc, char** argv) { return hisp::run_cli(argc, argv); }
