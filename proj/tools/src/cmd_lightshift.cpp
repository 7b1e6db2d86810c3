#include <fstream>
#include <vector>

#include "cmd_util.hpp"
#include "commands.hpp"
#include "json.hpp"
#include "ramankit/constants.hpp"
#include "ramankit/csv.hpp"
#include "ramankit/lightshift.hpp"

namespace ramansim {

using namespace ramankit;
using constants::boltzmann_kB;
using constants::two_pi;

// Scan of the repump light shift against detuning: instantaneous linear and
// exact dressed-state values, the oscillation average at each requested
// kinetic energy, and the resulting sideband position delta_c = delta_LS + nu.
int cmd_lightshift_scan(const CommonOptions& opts, const std::string& config_path) {
  auto ctx = begin_command(opts, config_path, "lightshift-scan");
  const auto cfg = parse_lightshift_scan_config(ctx.config_text);

  const phys::AtomSpecies atom = to_species(cfg.atom);
  const phys::LatticeParams lat = to_lattice(cfg.lattice);
  const phys::TrapOscillator trap = phys::trap_oscillator(lat, atom);
  const lightshift::TwoLevelModel model{atom.gamma, cfg.saturation};

  std::vector<std::vector<double>> rows;
  rows.reserve(cfg.kinetic_energy_uk.size() * cfg.n_points);
  for (const double ek_uk : cfg.kinetic_energy_uk) {
    const lightshift::OscillatingAtom osc{boltzmann_kB * ek_uk * 1e-6, trap, lat};
    for (int i = 0; i < cfg.n_points; ++i) {
      const double detuning_mhz =
          cfg.detuning_min_mhz + (cfg.detuning_max_mhz - cfg.detuning_min_mhz) * i /
                                     (cfg.n_points - 1);
      const double delta = two_pi * detuning_mhz * 1e6;
      const double avg = lightshift::oscillation_averaged_shift(model, delta, osc);
      rows.push_back({delta / two_pi, ek_uk,
                      lightshift::shift_linear(model, delta) / two_pi,
                      lightshift::shift_exact(model, delta) / two_pi, avg / two_pi,
                      (avg + trap.nu) / two_pi});
    }
  }
  csv::write_table(ctx.out("lightshift_scan.csv"),
                   {"detuning_hz", "kinetic_energy_uk", "shift_linear_hz",
                    "shift_exact_hz", "shift_oscillation_avg_hz", "sideband_center_hz"},
                   rows);

  nlohmann::json meta;
  meta["saturation"] = cfg.saturation;
  meta["gamma_hz"] = atom.gamma / two_pi;
  meta["trap_frequency_hz"] = trap.nu / two_pi;
  meta["lattice"] = {{"period_nm", cfg.lattice.period_nm},
                     {"depth_uk", cfg.lattice.depth_uk},
                     {"chi", cfg.lattice.chi}};
  meta["kinetic_energy_uk"] = cfg.kinetic_energy_uk;
  std::ofstream(ctx.out("scan.json")) << meta.dump(2) << "\n";

  finish_command(ctx, {"lightshift_scan.csv", "scan.json"}, true);
  return 0;
}

}  // namespace ramansim
