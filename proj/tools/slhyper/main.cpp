#include "cli.hpp"

int main(int argc, char** argv) { return slhyper::cli::run(argc, argv); }
