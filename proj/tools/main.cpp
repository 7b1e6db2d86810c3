#include "app.hpp"

int main(int argc, char** argv) { return ramansim::run_app(argc, argv); }
