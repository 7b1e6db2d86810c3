#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"
#include "manifest.hpp"

// Shared plumbing for the subcommand implementations: output directory
// handling and manifest bookkeeping.

namespace ramansim {

struct CommandContext {
  CommonOptions opts;
  std::string config_path;
  std::string config_text;
  RunManifest manifest;

  std::string out(const std::string& name) const {
    return (std::filesystem::path(opts.out_dir) / name).string();
  }
};

inline CommandContext begin_command(const CommonOptions& opts,
                                    const std::string& config_path,
                                    const std::string& command) {
  CommandContext ctx;
  ctx.opts = opts;
  ctx.config_path = config_path;
  ctx.config_text = read_text_file(config_path);
  std::filesystem::create_directories(opts.out_dir);
  ctx.manifest.command = command;
  ctx.manifest.config_path = config_path;
  ctx.manifest.config_hash = hex64(fnv1a64(ctx.config_text));
  ctx.manifest.seed = opts.seed;
  ctx.manifest.threads = opts.threads;
  ctx.manifest.started_utc = utc_timestamp();
  return ctx;
}

inline void finish_command(CommandContext& ctx, std::vector<std::string> outputs,
                           bool converged) {
  ctx.manifest.outputs = std::move(outputs);
  ctx.manifest.status = converged ? "ok" : "not_converged";
  ctx.manifest.finished_utc = utc_timestamp();
  ctx.manifest.write(ctx.out("manifest.json"));
}

}  // namespace ramansim
