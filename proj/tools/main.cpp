#include "yankflow/cli.hpp"

int main(int argc, char** argv) { return yankflow::cli::run(argc, argv); }
