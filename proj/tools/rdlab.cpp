#include "rdlab_cli.hpp"

int main(int argc, char** argv) { return rdlab::cli::dispatch(argc, argv); }
