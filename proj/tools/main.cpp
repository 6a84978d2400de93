#include "linkcorr/cli.hpp"

int main(int argc, char** argv) { return linkcorr::run_cli(argc, argv); }
