#include "culture/cli.hpp"

int main(int argc, char** argv) { return culture::cli::run(argc, argv); }
