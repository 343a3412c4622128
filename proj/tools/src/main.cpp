#include "run.hpp"

int main(int argc, char** argv) { return sorterlab::cli::run(argc, argv); }
