#include "srflow/cli.hpp"

int main(int argc, char** argv) { return srflow::cli::run(argc, argv); }
