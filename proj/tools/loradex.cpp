#include "cli.hpp"

int main(int argc, char** argv) { return loradex::cli::run(argc, argv); }
