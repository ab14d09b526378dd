#include "dsse/cli.hpp"

int main(int argc, char** argv) { return dsse::cli_main(argc, argv); }
