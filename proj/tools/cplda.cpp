#include "cplda/cli.hpp"

int main(int argc, char** argv) { return cplda::run_cli(argc, argv); }
