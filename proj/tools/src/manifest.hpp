#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Provenance record written next to every command's outputs, so a result
// directory is self-describing: which tool version produced it, from which
// config (by content hash), with which seed, and whether everything converged.

namespace ramansim {

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t value);
std::string utc_timestamp();

struct RunManifest {
  std::string command;
  std::string config_path;
  std::string config_hash;  // fnv1a-64 of the config file bytes, hex
  std::uint64_t seed = 0;
  int threads = 1;
  std::string started_utc;
  std::string finished_utc;
  std::vector<std::string> outputs;  // file names relative to the out dir
  std::string status;                // "ok" or "not_converged"

  void write(const std::string& path) const;
};

}  // namespace ramansim
