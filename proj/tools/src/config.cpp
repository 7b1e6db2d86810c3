#include "config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "ramankit/constants.hpp"

namespace ramansim {

using json = nlohmann::json;
using ramankit::constants::atomic_mass_unit;
using ramankit::constants::boltzmann_kB;
using ramankit::constants::two_pi;

namespace {

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config: ") + e.what());
  }
}

const json& require(const json& j, const std::string& key, const std::string& path) {
  const auto it = j.find(key);
  if (it == j.end())
    throw std::runtime_error("config: missing key '" + path + key + "'");
  return *it;
}

double number(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number())
    throw std::runtime_error("config: '" + path + key + "' must be a number");
  return v.get<double>();
}

double number_or(const json& j, const std::string& key, double fallback,
                 const std::string& path) {
  return j.contains(key) ? number(j, key, path) : fallback;
}

int integer(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number_integer())
    throw std::runtime_error("config: '" + path + key + "' must be an integer");
  return v.get<int>();
}

int integer_or(const json& j, const std::string& key, int fallback,
               const std::string& path) {
  return j.contains(key) ? integer(j, key, path) : fallback;
}

bool boolean_or(const json& j, const std::string& key, bool fallback,
                const std::string& path) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean())
    throw std::runtime_error("config: '" + path + key + "' must be a boolean");
  return v.get<bool>();
}

std::string text(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_string())
    throw std::runtime_error("config: '" + path + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> number_list(const json& j, const std::string& key,
                                const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_array() || v.empty())
    throw std::runtime_error("config: '" + path + key +
                             "' must be a non-empty array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number())
      throw std::runtime_error("config: '" + path + key +
                               "' must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::optional<AtomConfig> parse_atom(const json& j) {
  if (!j.contains("atom")) return std::nullopt;
  const json& a = j.at("atom");
  AtomConfig out;
  out.mass_amu = number(a, "mass_amu", "atom.");
  out.gamma_mhz = number(a, "gamma_mhz", "atom.");
  out.wavelength_nm = number(a, "wavelength_nm", "atom.");
  return out;
}

LatticeConfig parse_lattice(const json& j) {
  const json& l = require(j, "lattice", "");
  LatticeConfig out;
  out.period_nm = number(l, "period_nm", "lattice.");
  out.depth_uk = number(l, "depth_uk", "lattice.");
  out.chi = number(l, "chi", "lattice.");
  return out;
}

bool parse_reference(const json& j, const std::string& path) {
  if (!j.contains("detuning_reference")) return false;
  const std::string ref = text(j, "detuning_reference", path);
  if (ref == "free_space") return false;
  if (ref == "well_bottom") return true;
  throw std::runtime_error("config: '" + path +
                           "detuning_reference' must be 'free_space' or 'well_bottom'");
}

McRunConfig parse_mc_run(const json& j) {
  McRunConfig out;
  out.atom = parse_atom(j);
  out.lattice = parse_lattice(j);
  const json& m = require(j, "mc", "");
  out.t_max_ms = number_or(m, "t_max_ms", out.t_max_ms, "mc.");
  out.ensemble_n = integer_or(m, "ensemble_n", out.ensemble_n, "mc.");
  out.init_temperature_uk =
      number_or(m, "init_temperature_uk", out.init_temperature_uk, "mc.");
  out.time_bins = integer_or(m, "time_bins", out.time_bins, "mc.");
  out.double_recoil = boolean_or(m, "double_recoil", out.double_recoil, "mc.");
  return out;
}

DshParamsConfig parse_dsh_params(const json& j) {
  const json& d = require(j, "dsh", "");
  DshParamsConfig out;
  out.aom_offset_mhz = number_or(d, "aom_offset_mhz", out.aom_offset_mhz, "dsh.");
  out.fiber_delay_us = number_or(d, "fiber_delay_us", out.fiber_delay_us, "dsh.");
  out.sample_rate_mhz = number_or(d, "sample_rate_mhz", out.sample_rate_mhz, "dsh.");
  out.n_samples_log2 = integer_or(d, "n_samples_log2", out.n_samples_log2, "dsh.");
  out.segment_length_log2 =
      integer_or(d, "segment_length_log2", out.segment_length_log2, "dsh.");
  out.analysis_span_mhz =
      number_or(d, "analysis_span_mhz", out.analysis_span_mhz, "dsh.");
  return out;
}

ramankit::dsh::NoiseAmplitudes parse_noise(const json& j, const std::string& key) {
  const json& n = require(j, key, "");
  ramankit::dsh::NoiseAmplitudes out;
  out.a_white = number_or(n, "a_white", 0.0, key + ".");
  out.a_flicker = number_or(n, "a_flicker", 0.0, key + ".");
  out.a_randomwalk = number_or(n, "a_randomwalk", 0.0, key + ".");
  return out;
}

}  // namespace

LightshiftScanConfig parse_lightshift_scan_config(const std::string& json_text) {
  const json j = parse_json(json_text);
  LightshiftScanConfig out;
  out.atom = parse_atom(j);
  out.lattice = parse_lattice(j);
  out.saturation = number(j, "saturation", "");
  out.kinetic_energy_uk = number_list(j, "kinetic_energy_uk", "");
  const json& d = require(j, "detuning", "");
  out.detuning_min_mhz = number(d, "min_mhz", "detuning.");
  out.detuning_max_mhz = number(d, "max_mhz", "detuning.");
  out.n_points = integer(d, "n_points", "detuning.");
  if (out.n_points < 2)
    throw std::runtime_error("config: 'detuning.n_points' must be at least 2");
  if (!(out.detuning_max_mhz > out.detuning_min_mhz))
    throw std::runtime_error("config: 'detuning.max_mhz' must exceed 'detuning.min_mhz'");
  return out;
}

McSingleConfig parse_mc_single_config(const std::string& json_text) {
  const json j = parse_json(json_text);
  McSingleConfig out;
  out.run = parse_mc_run(j);
  const json& r = require(j, "repumper", "");
  out.repumper.saturation = number(r, "saturation", "repumper.");
  out.repumper.detuning_mhz = number(r, "detuning_mhz", "repumper.");
  out.repumper.reference_well_bottom = parse_reference(r, "repumper.");
  return out;
}

McMapConfig parse_mc_map_config(const std::string& json_text) {
  const json j = parse_json(json_text);
  McMapConfig out;
  out.run = parse_mc_run(j);
  const json& m = require(j, "map", "");
  out.s_grid = number_list(m, "s_grid", "map.");
  out.detuning_grid_mhz = number_list(m, "detuning_grid_mhz", "map.");
  out.reference_well_bottom = parse_reference(m, "map.");
  return out;
}

SpectrumFitConfig parse_spectrum_fit_config(const std::string& json_text) {
  const json j = parse_json(json_text);
  SpectrumFitConfig out;
  out.spectrum_csv = text(j, "spectrum_csv", "");
  const auto nu = number_list(j, "trap_frequencies_khz", "");
  if (nu.size() != 3)
    throw std::runtime_error("config: 'trap_frequencies_khz' must have 3 entries");
  std::copy(nu.begin(), nu.end(), out.trap_frequencies_khz.begin());
  if (j.contains("fit")) {
    const json& f = j.at("fit");
    out.init_fwhm_khz = number_or(f, "init_fwhm_khz", out.init_fwhm_khz, "fit.");
    out.n_starts = integer_or(f, "n_starts", out.n_starts, "fit.");
    out.tol = number_or(f, "tol", out.tol, "fit.");
    out.max_eval = integer_or(f, "max_eval", out.max_eval, "fit.");
  }
  return out;
}

DshSimulateConfig parse_dsh_simulate_config(const std::string& json_text) {
  const json j = parse_json(json_text);
  DshSimulateConfig out;
  out.noise = parse_noise(j, "noise");
  out.dsh = parse_dsh_params(j);
  return out;
}

DshFitConfig parse_dsh_fit_config(const std::string& json_text) {
  const json j = parse_json(json_text);
  DshFitConfig out;
  out.target_psd_csv = text(j, "target_psd_csv", "");
  out.init = parse_noise(j, "init");
  out.dsh = parse_dsh_params(j);
  if (j.contains("fit")) {
    const json& f = j.at("fit");
    out.n_refits = integer_or(f, "n_refits", out.n_refits, "fit.");
    out.tol = number_or(f, "tol", out.tol, "fit.");
    out.max_eval = integer_or(f, "max_eval", out.max_eval, "fit.");
  }
  return out;
}

ramankit::phys::AtomSpecies to_species(const std::optional<AtomConfig>& atom) {
  if (!atom) return ramankit::phys::AtomSpecies::rb87();
  return ramankit::phys::AtomSpecies::make(atom->mass_amu * atomic_mass_unit,
                                           two_pi * atom->gamma_mhz * 1e6,
                                           atom->wavelength_nm * 1e-9);
}

ramankit::phys::LatticeParams to_lattice(const LatticeConfig& lattice) {
  return ramankit::phys::LatticeParams::make(
      lattice.period_nm * 1e-9, boltzmann_kB * lattice.depth_uk * 1e-6, lattice.chi);
}

ramankit::dsh::DshConfig to_dsh_config(const DshParamsConfig& dsh) {
  ramankit::dsh::DshConfig out;
  out.aom_offset = dsh.aom_offset_mhz * 1e6;
  out.fiber_delay = dsh.fiber_delay_us * 1e-6;
  out.sample_rate = dsh.sample_rate_mhz * 1e6;
  if (dsh.n_samples_log2 < 1 || dsh.n_samples_log2 > 26)
    throw std::runtime_error("config: 'dsh.n_samples_log2' out of range [1, 26]");
  if (dsh.segment_length_log2 < 1 || dsh.segment_length_log2 > 26)
    throw std::runtime_error("config: 'dsh.segment_length_log2' out of range [1, 26]");
  out.n_samples = std::size_t{1} << dsh.n_samples_log2;
  out.segment_length = std::size_t{1} << dsh.segment_length_log2;
  out.analysis_span = dsh.analysis_span_mhz * 1e6;
  out.validate();
  return out;
}

double to_free_space_detuning(double detuning_mhz, bool reference_well_bottom,
                              const ramankit::phys::LatticeParams& lattice) {
  double detuning = two_pi * detuning_mhz * 1e6;
  if (reference_well_bottom)
    detuning += lattice.depth_U0 * (1.0 - lattice.chi) / ramankit::constants::hbar;
  return detuning;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ramansim
