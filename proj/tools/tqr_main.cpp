#include "tqr/cli.hpp"

int main(int argc, char** argv) { return tqr::run(argc, argv); }
