#include "subaug/cli.hpp"

int main(int argc, char** argv) { return subaug::run_cli(argc, argv); }
