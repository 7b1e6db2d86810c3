#include <fstream>

#include "cmd_util.hpp"
#include "commands.hpp"
#include "json.hpp"
#include "ramankit/dsh.hpp"

namespace ramansim {

using namespace ramankit;

int cmd_dsh_simulate(const CommonOptions& opts, const std::string& config_path) {
  auto ctx = begin_command(opts, config_path, "dsh-simulate");
  const auto cfg = parse_dsh_simulate_config(ctx.config_text);
  const dsh::DshConfig dcfg = to_dsh_config(cfg.dsh);

  const dsh::PsdSpectrum psd = dsh::simulate_beat_psd(cfg.noise, dcfg, opts.seed);
  psd.save_csv(ctx.out("psd.csv"));

  nlohmann::json out;
  out["a_white"] = cfg.noise.a_white;
  out["a_flicker"] = cfg.noise.a_flicker;
  out["a_randomwalk"] = cfg.noise.a_randomwalk;
  out["lorentzian_hz"] = dsh::lorentzian_linewidth(cfg.noise.a_white);
  out["resolution_bw_hz"] = psd.resolution_bw;
  out["n_segments"] = psd.n_segments;
  out["delay_samples"] = dcfg.delay_samples();
  try {
    out["measured_fwhm_hz"] =
        dsh::measure_fwhm(psd, dcfg.aom_offset, dcfg.analysis_span);
  } catch (const std::exception&) {
    // wider than the analysis window; the PSD itself is still valid output
    out["measured_fwhm_hz"] = nullptr;
  }
  std::ofstream(ctx.out("beat_summary.json")) << out.dump(2) << "\n";

  finish_command(ctx, {"psd.csv", "beat_summary.json"}, true);
  return 0;
}

int cmd_dsh_fit(const CommonOptions& opts, const std::string& config_path) {
  auto ctx = begin_command(opts, config_path, "dsh-fit");
  const auto cfg = parse_dsh_fit_config(ctx.config_text);
  const dsh::DshConfig dcfg = to_dsh_config(cfg.dsh);

  const dsh::PsdSpectrum target = dsh::PsdSpectrum::load_csv(cfg.target_psd_csv);
  dsh::FitNoiseOptions fit_opts;
  fit_opts.n_refits = cfg.n_refits;
  fit_opts.nm = {cfg.tol, cfg.max_eval};
  const dsh::LinewidthEstimate est =
      dsh::fit_noise_amplitudes(target, dcfg, cfg.init, opts.seed, fit_opts);

  nlohmann::json out;
  out["a_white"] = est.amplitudes.a_white;
  out["a_flicker"] = est.amplitudes.a_flicker;
  out["a_randomwalk"] = est.amplitudes.a_randomwalk;
  out["lorentzian_hz"] = est.lorentzian_hz;
  out["gaussian_flicker_hz"] = est.gaussian_flicker_hz;
  out["randomwalk_hz"] = est.randomwalk_hz;
  out["lorentzian_err_hz"] = est.lorentzian_err_hz;
  out["converged"] = est.fit.converged;
  out["n_evaluations"] = est.fit.n_evaluations;
  out["objective_value"] = est.fit.objective_value;
  std::ofstream(ctx.out("linewidth.json")) << out.dump(2) << "\n";

  finish_command(ctx, {"linewidth.json"}, est.fit.converged);
  return est.fit.converged ? 0 : 2;
}

}  // namespace ramansim
