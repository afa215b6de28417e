#include "men_cli.hpp"

int main(int argc, char** argv) { return men::cli::run(argc, argv); }
