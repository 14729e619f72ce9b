#include "survbal/cli.hpp"

int main(int argc, char** argv) { return survbal::run_cli(argc, argv); }
