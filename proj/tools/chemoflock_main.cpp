#include "chemoflock/cli.hpp"

int main(int argc, char** argv) { return chemoflock::run_cli(argc, argv); }
