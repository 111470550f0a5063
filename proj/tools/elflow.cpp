#include "elflow/cli_io.hpp"

int main(int argc, char** argv) { return elflow::cli_main(argc, argv); }
