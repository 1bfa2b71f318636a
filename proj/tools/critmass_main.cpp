#include "critmass/cli.hpp"

int main(int argc, char** argv) { return critmass::cli::run(argc, argv); }
