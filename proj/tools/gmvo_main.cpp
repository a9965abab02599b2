#include "gmvo/cli.hpp"

int main(int argc, char** argv) { return gmvo::cli::run(argc, argv); }
