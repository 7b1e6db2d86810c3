#pragma once

// Command line entry point, separated from main() so the argument wiring and
// the subcommands are testable in-process.

namespace ramansim {

int run_app(int argc, const char* const* argv);

}  // namespace ramansim
