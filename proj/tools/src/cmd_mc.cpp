#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cmd_util.hpp"
#include "commands.hpp"
#include "json.hpp"
#include "ramankit/constants.hpp"
#include "ramankit/csv.hpp"
#include "ramankit/dressed_mc.hpp"
#include "ramankit/rng.hpp"

namespace ramansim {

using namespace ramankit;
using constants::boltzmann_kB;
using constants::two_pi;

namespace {

const std::vector<std::string> kMapHeader = {
    "s", "detuning_hz", "loss_rate_per_s", "loss_rate_err", "scatter_rate_per_s",
    "scatter_rate_err", "n_atoms", "n_lost"};

mc::MCConfig build_mc_config(const McRunConfig& run, const mc::DressedField& field,
                             std::uint64_t seed) {
  mc::MCConfig cfg = mc::MCConfig::defaults_for(field);
  cfg.t_max = run.t_max_ms * 1e-3;
  cfg.ensemble_n = run.ensemble_n;
  cfg.init_temperature = run.init_temperature_uk * 1e-6;
  cfg.time_bins = run.time_bins;
  cfg.double_recoil = run.double_recoil;
  cfg.seed = seed;
  cfg.validate(field);
  return cfg;
}

}  // namespace

int cmd_mc_single(const CommonOptions& opts, const std::string& config_path) {
  auto ctx = begin_command(opts, config_path, "mc-single");
  const auto cfg = parse_mc_single_config(ctx.config_text);

  const phys::AtomSpecies atom = to_species(cfg.run.atom);
  const phys::LatticeParams lat = to_lattice(cfg.run.lattice);
  const double detuning = to_free_space_detuning(
      cfg.repumper.detuning_mhz, cfg.repumper.reference_well_bottom, lat);
  const auto field = mc::DressedField::make(
      lat, phys::RepumperField::from_saturation(cfg.repumper.saturation, atom,
                                                detuning, lat),
      atom);
  const mc::MCConfig mc_cfg = build_mc_config(cfg.run, field, opts.seed);
  const mc::EnsembleResult r = mc::run_ensemble(mc_cfg, field, opts.threads);

  std::vector<std::vector<double>> curve_rows;
  for (std::size_t k = 0; k < r.time_grid.size(); ++k)
    curve_rows.push_back({r.time_grid[k], r.survival_fraction[k], r.mean_photons[k],
                          r.mean_kinetic_energy[k] / boltzmann_kB * 1e6});
  csv::write_table(ctx.out("curves.csv"),
                   {"time_s", "survival_fraction", "mean_photons",
                    "mean_kinetic_energy_uk"},
                   curve_rows);

  std::vector<std::vector<double>> event_rows;
  event_rows.reserve(r.photon_events.size());
  for (const auto& [idx, t] : r.photon_events)
    event_rows.push_back({static_cast<double>(idx), t});
  csv::write_table(ctx.out("photon_events.csv"), {"atom_index", "time_s"}, event_rows);

  nlohmann::json summary;
  summary["loss_rate_per_s"] = r.loss_rate;
  summary["loss_rate_err"] = r.diagnostics.loss_rate_err;
  summary["loss_rate_lower_bound"] = r.diagnostics.loss_rate_lower_bound;
  summary["scatter_rate_per_s"] = r.scatter_rate;
  summary["scatter_rate_err"] = r.diagnostics.scatter_rate_err;
  summary["ke_heating_rate_per_s"] = r.diagnostics.ke_heating_rate;
  summary["n_atoms"] = r.n_atoms;
  summary["n_lost"] = r.n_lost;
  summary["detuning_free_space_hz"] = detuning / two_pi;
  std::ofstream(ctx.out("summary.json")) << summary.dump(2) << "\n";

  finish_command(ctx, {"curves.csv", "photon_events.csv", "summary.json"}, true);
  return 0;
}

int cmd_mc_map(const CommonOptions& opts, const std::string& config_path) {
  auto ctx = begin_command(opts, config_path, "mc-map");
  const auto cfg = parse_mc_map_config(ctx.config_text);

  const phys::AtomSpecies atom = to_species(cfg.run.atom);
  const phys::LatticeParams lat = to_lattice(cfg.run.lattice);

  std::vector<double> s_grid = cfg.s_grid;
  std::vector<double> det_grid;
  det_grid.reserve(cfg.detuning_grid_mhz.size());
  for (const double d : cfg.detuning_grid_mhz)
    det_grid.push_back(to_free_space_detuning(d, cfg.reference_well_bottom, lat));
  // same canonical order as the library sweep, so cell (i, j) and its seed
  // are independent of how the config lists the grids
  std::sort(s_grid.begin(), s_grid.end());
  std::sort(det_grid.begin(), det_grid.end());

  const auto field_template = mc::DressedField::make(
      lat, phys::RepumperField::from_saturation(s_grid.front(), atom,
                                                det_grid.front(), lat),
      atom);
  const mc::MCConfig mc_cfg = build_mc_config(cfg.run, field_template, opts.seed);

  const std::filesystem::path ckpt_dir =
      std::filesystem::path(opts.out_dir) / "checkpoints";
  std::filesystem::create_directories(ckpt_dir);

  std::vector<std::vector<double>> rows;
  rows.reserve(s_grid.size() * det_grid.size());
  int reused = 0;
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    for (std::size_t j = 0; j < det_grid.size(); ++j) {
      const std::string ckpt =
          (ckpt_dir / ("cell_" + std::to_string(i) + "_" + std::to_string(j) + ".csv"))
              .string();
      if (opts.resume && std::filesystem::exists(ckpt)) {
        try {
          const csv::Table t = csv::read_table(ckpt);
          if (t.header == kMapHeader && t.rows.size() == 1 &&
              t.rows[0][0] == s_grid[i] &&
              t.rows[0][1] == det_grid[j] / two_pi &&
              t.rows[0][6] == static_cast<double>(mc_cfg.ensemble_n)) {
            rows.push_back(t.rows[0]);
            ++reused;
            continue;
          }
          std::fprintf(stderr, "mc-map: checkpoint %s does not match the run, redoing\n",
                       ckpt.c_str());
        } catch (const std::exception& e) {
          std::fprintf(stderr, "mc-map: unreadable checkpoint %s (%s), redoing\n",
                       ckpt.c_str(), e.what());
        }
      }
      const mc::EnsembleResult r =
          mc::sweep_cell(mc_cfg, field_template, s_grid[i], det_grid[j],
                         rng::mix(opts.seed, i, j), opts.threads);
      const std::vector<double> row = {
          s_grid[i],
          det_grid[j] / two_pi,
          r.loss_rate,
          r.diagnostics.loss_rate_err,
          r.scatter_rate,
          r.diagnostics.scatter_rate_err,
          static_cast<double>(r.n_atoms),
          static_cast<double>(r.n_lost)};
      csv::write_table(ckpt, kMapHeader, {row});
      rows.push_back(row);
    }
  }
  if (reused > 0)
    std::fprintf(stderr, "mc-map: reused %d checkpointed cell(s)\n", reused);

  csv::write_table(ctx.out("rate_map.csv"), kMapHeader, rows);

  nlohmann::json meta;
  meta["s_grid"] = s_grid;
  nlohmann::json det_hz = nlohmann::json::array();
  for (const double d : det_grid) det_hz.push_back(d / two_pi);
  meta["detuning_grid_hz"] = det_hz;
  meta["n_atoms_per_cell"] = mc_cfg.ensemble_n;
  meta["t_max_s"] = mc_cfg.t_max;
  meta["seed"] = opts.seed;
  meta["config_hash"] = ctx.manifest.config_hash;
  std::ofstream(ctx.out("rate_map.json")) << meta.dump(2) << "\n";

  finish_command(ctx, {"rate_map.csv", "rate_map.json"}, true);
  return 0;
}

}  // namespace ramansim
