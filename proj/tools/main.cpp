#include "netlqg/cli.hpp"

int main(int argc, char** argv) { return netlqg::cli_run(argc, argv); }
