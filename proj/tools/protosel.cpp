#include "cli.hpp"

int main(int argc, char** argv) { return protosel::cli::run(argc, argv); }
