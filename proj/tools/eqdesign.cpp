#include "eqdesign/cli.hpp"

int main(int argc, char** argv) { return eqdesign::cli::run(argc, argv); }
