#include "birs/cli.hpp"

int main(int argc, char** argv) { return birs::cli::run(argc, argv); }
