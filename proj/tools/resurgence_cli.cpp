#include "resurgence/cli.hpp"

int main(int argc, char** argv) { return resurgence::cli::main(argc, argv); }
