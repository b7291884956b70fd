#include "dfuse/cli.hpp"

int main(int argc, char** argv) { return dfuse::cli::run(argc, argv); }
