#include "cli.hpp"

int main(int argc, char** argv) { return ptrguard::cli::main_with_args(argc, argv); }
