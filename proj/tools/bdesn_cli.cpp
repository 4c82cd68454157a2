#include "bdesn/cli.hpp"

int main(int argc, char** argv) { return bdesn::cli::run(argc, argv); }
