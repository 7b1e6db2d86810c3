#include "app.hpp"

#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"

#ifndef RAMANSIM_VERSION
#define RAMANSIM_VERSION "unknown"
#endif

namespace ramansim {

namespace {

using CommandFn = int (*)(const CommonOptions&, const std::string&);

struct SubcommandSpec {
  const char* name;
  const char* description;
  CommandFn fn;
};

const SubcommandSpec kCommands[] = {
    {"lightshift-scan",
     "Light shift of the repump line vs detuning, with oscillation averages",
     cmd_lightshift_scan},
    {"mc-single", "Dressed-state Monte Carlo ensemble at one working point",
     cmd_mc_single},
    {"mc-map", "Loss and scatter rate map over a (saturation, detuning) grid",
     cmd_mc_map},
    {"spectrum-fit", "Seven-Lorentzian sideband fit and thermometry", cmd_spectrum_fit},
    {"dsh-simulate", "Delayed self-heterodyne beat PSD for a laser noise model",
     cmd_dsh_simulate},
    {"dsh-fit", "Fit laser noise amplitudes to a measured beat PSD", cmd_dsh_fit},
};

}  // namespace

int run_app(int argc, const char* const* argv) {
  CLI::App app{"Raman imaging simulation toolkit"};
  app.set_version_flag("--version", RAMANSIM_VERSION);
  app.require_subcommand(1);

  CommonOptions opts;
  std::string config_path;
  CommandFn selected = nullptr;

  for (const auto& spec : kCommands) {
    CLI::App* sub = app.add_subcommand(spec.name, spec.description);
    sub->add_option("-c,--config", config_path, "JSON run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", opts.seed, "Base RNG seed");
    sub->add_option("--threads", opts.threads, "Worker threads")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out-dir", opts.out_dir, "Output directory");
    sub->add_flag("--resume", opts.resume,
                  "Reuse finished per-cell checkpoints (mc-map)");
    sub->callback([&selected, fn = spec.fn]() { selected = fn; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    return selected(opts, config_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "raman-sim: error: %s\n", e.what());
    return 1;
  }
}

}  // namespace ramansim
