#include "cli.hpp"

int main(int argc, char** argv) { return amnet::cli::run(argc, argv); }
