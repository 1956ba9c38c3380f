#include "bowsim/cli_app.hpp"

int main(int argc, char** argv) { return bowsim::run_cli(argc, argv); }
