#include "pceuq/cli.hpp"

int main(int argc, char** argv) { return pceuq::cli::run(argc, argv); }
