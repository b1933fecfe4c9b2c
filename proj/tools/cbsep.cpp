#include "cbsep/cli.hpp"

int main(int argc, char** argv) { return cbsep::cli::dispatch(argc, argv); }
