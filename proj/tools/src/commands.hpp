#pragma once

#include <string>

#include "config.hpp"

// One entry point per raman-sim subcommand. Each reads the JSON config at
// `config_path`, writes its outputs plus a manifest.json into opts.out_dir
// and returns the process exit code: 0 on success, 2 when a fit failed to
// converge (outputs are still written). Errors are reported by throwing.

namespace ramansim {

int cmd_lightshift_scan(const CommonOptions& opts, const std::string& config_path);
int cmd_mc_single(const CommonOptions& opts, const std::string& config_path);
int cmd_mc_map(const CommonOptions& opts, const std::string& config_path);
int cmd_spectrum_fit(const CommonOptions& opts, const std::string& config_path);
int cmd_dsh_simulate(const CommonOptions& opts, const std::string& config_path);
int cmd_dsh_fit(const CommonOptions& opts, const std::string& config_path);

}  // namespace ramansim
