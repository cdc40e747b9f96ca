#include "stfreq/cli.hpp"

int main(int argc, char** argv) { return stfreq::cli::run(argc, argv); }
