#include "lcmdp/cli.hpp"

int main(int argc, char** argv) { return lcmdp::cli::run(argc, argv); }
