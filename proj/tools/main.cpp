#include "dyadrisk/app.hpp"

int main(int argc, char** argv) { return dyadrisk::run_cli(argc, argv); }
