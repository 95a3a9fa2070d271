#include "ossforge/pipeline.hpp"

int main(int argc, char** argv) { return ossforge::run_cli(argc, argv); }
