#include "bolostat/cli.hpp"

int main(int argc, char** argv) { return bolostat::cli_main(argc, argv); }
