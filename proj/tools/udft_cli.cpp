#include "udft/cli.hpp"

int main(int argc, char** argv) { return udft::cli_dispatch(argc, argv); }
