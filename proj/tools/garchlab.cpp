#include "garchlab/experiments.hpp"

int main(int argc, char** argv) { return garchlab::cli_main(argc, argv); }
