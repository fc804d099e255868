#include "coalition_nash/harness.hpp"

int main(int argc, char** argv) { return coalition_nash::cli(argc, argv); }
