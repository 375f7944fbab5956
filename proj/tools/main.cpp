#include "fracneu/cli.hpp"

int main(int argc, char** argv) { return fracneu::run_cli(argc, argv); }
