#include "sackit/cli.hpp"

int main(int argc, char** argv) { return sackit::cli::run(argc, argv); }
