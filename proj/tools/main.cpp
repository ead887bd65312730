#include "roshap/cli.hpp"

int main(int argc, char** argv) { return roshap::cli::run(argc, argv); }
