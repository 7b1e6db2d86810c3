#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ramankit/dsh.hpp"
#include "ramankit/phys.hpp"

// JSON run configurations for the raman-sim subcommands. All file-facing
// quantities use lab units (MHz, kHz, microkelvin, nm, us, ms); the parse
// helpers convert to the rad/s + SI convention of the library.

namespace ramansim {

struct CommonOptions {
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = ".";
  bool resume = false;
};

struct AtomConfig {
  double mass_amu = 0.0;
  double gamma_mhz = 0.0;       // half linewidth / 2 pi
  double wavelength_nm = 0.0;   // repump transition
};

struct LatticeConfig {
  double period_nm = 0.0;
  double depth_uk = 0.0;  // U0 / kB
  double chi = 0.0;
};

struct RepumperConfig {
  double saturation = 0.0;
  double detuning_mhz = 0.0;
  bool reference_well_bottom = false;  // detuning relative to the shifted line
};

struct LightshiftScanConfig {
  std::optional<AtomConfig> atom;  // default 87Rb D1
  LatticeConfig lattice;
  double saturation = 0.0;
  std::vector<double> kinetic_energy_uk;  // oscillation energies, >= 1 entry
  double detuning_min_mhz = 0.0;
  double detuning_max_mhz = 0.0;
  int n_points = 0;
};

struct McRunConfig {
  std::optional<AtomConfig> atom;
  LatticeConfig lattice;
  double t_max_ms = 20.0;
  int ensemble_n = 500;
  double init_temperature_uk = 100.0;
  int time_bins = 64;
  bool double_recoil = false;
};

struct McSingleConfig {
  McRunConfig run;
  RepumperConfig repumper;
};

struct McMapConfig {
  McRunConfig run;
  std::vector<double> s_grid;
  std::vector<double> detuning_grid_mhz;
  bool reference_well_bottom = false;
};

struct SpectrumFitConfig {
  std::string spectrum_csv;
  std::array<double, 3> trap_frequencies_khz{};
  double init_fwhm_khz = 30.0;
  int n_starts = 8;
  double tol = 1e-10;
  int max_eval = 60000;
};

struct DshParamsConfig {
  double aom_offset_mhz = 2.5;
  double fiber_delay_us = 24.0;
  double sample_rate_mhz = 12.5;
  int n_samples_log2 = 20;
  int segment_length_log2 = 15;
  double analysis_span_mhz = 2.0;
};

struct DshSimulateConfig {
  ramankit::dsh::NoiseAmplitudes noise;
  DshParamsConfig dsh;
};

struct DshFitConfig {
  std::string target_psd_csv;
  ramankit::dsh::NoiseAmplitudes init;
  DshParamsConfig dsh;
  int n_refits = 0;
  double tol = 1e-4;
  int max_eval = 400;
};

// Parsers take the raw JSON text and throw std::runtime_error with the
// offending key path on malformed input.
LightshiftScanConfig parse_lightshift_scan_config(const std::string& json_text);
McSingleConfig parse_mc_single_config(const std::string& json_text);
McMapConfig parse_mc_map_config(const std::string& json_text);
SpectrumFitConfig parse_spectrum_fit_config(const std::string& json_text);
DshSimulateConfig parse_dsh_simulate_config(const std::string& json_text);
DshFitConfig parse_dsh_fit_config(const std::string& json_text);

// Library-unit conversions.
ramankit::phys::AtomSpecies to_species(const std::optional<AtomConfig>& atom);
ramankit::phys::LatticeParams to_lattice(const LatticeConfig& lattice);
ramankit::dsh::DshConfig to_dsh_config(const DshParamsConfig& dsh);

// Free-space detuning in rad/s; well-bottom referenced inputs are shifted by
// the differential light shift of the lattice.
double to_free_space_detuning(double detuning_mhz, bool reference_well_bottom,
                              const ramankit::phys::LatticeParams& lattice);

std::string read_text_file(const std::string& path);

}  // namespace ramansim
