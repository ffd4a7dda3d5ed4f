#include "seqdetect/cli.hpp"

int main(int argc, char** argv) { return seqdetect::cli_main(argc, argv); }
