#include "levycal/cli.hpp"

int main(int argc, char** argv) { return levycal::cli::run(argc, argv); }
