#include "eisc/cli.hpp"

int main(int argc, char** argv) { return eisc::cli::dispatch(argc, argv); }
