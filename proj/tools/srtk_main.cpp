#include "srtk/cli.hpp"

int main(int argc, char** argv) { return srtk::cli::run(argc, argv); }
