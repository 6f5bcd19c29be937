#include "pks/cli.hpp"

int main(int argc, char** argv) { return pks::cli::main(argc, argv); }
