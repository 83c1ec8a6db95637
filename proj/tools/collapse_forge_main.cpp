#include "cforge/cli.hpp"

int main(int argc, char** argv) { return cforge::run(argc, argv); }
