#include <algorithm>
#include <fstream>
#include <vector>

#include "cmd_util.hpp"
#include "commands.hpp"
#include "json.hpp"
#include "ramankit/constants.hpp"
#include "ramankit/csv.hpp"
#include "ramankit/spectra.hpp"

namespace ramansim {

using namespace ramankit;
using constants::boltzmann_kB;
using constants::two_pi;

namespace {

nlohmann::json peak_json(const optim::LorentzianPeak& p) {
  return {{"center_hz", p.center}, {"fwhm_hz", p.fwhm}, {"amplitude", p.amplitude}};
}

}  // namespace

// Fits the seven-Lorentzian sideband model to a measured Raman spectrum and
// reports the sideband-imbalance thermometry. The initial guess places the
// peaks at the configured trap frequencies and scales amplitudes from the
// data range.
int cmd_spectrum_fit(const CommonOptions& opts, const std::string& config_path) {
  auto ctx = begin_command(opts, config_path, "spectrum-fit");
  const auto cfg = parse_spectrum_fit_config(ctx.config_text);

  const auto spec = spectra::RamanSpectrum::load_csv(cfg.spectrum_csv);
  const auto [lo_it, hi_it] =
      std::minmax_element(spec.transfer_probability.begin(),
                          spec.transfer_probability.end());
  const double range = std::max(*hi_it - *lo_it, 1e-3);

  spectra::SidebandFit init{};
  for (int i = 0; i < 3; ++i) {
    const double center = cfg.trap_frequencies_khz[i] * 1e3;
    init.cooling[i] = {center, cfg.init_fwhm_khz * 1e3, 0.3 * range};
    init.heating[i] = {-center, cfg.init_fwhm_khz * 1e3, 0.5 * range};
  }
  init.carrier = {0.0, 1.5 * cfg.init_fwhm_khz * 1e3, 0.8 * range};
  init.baseline = std::max(0.0, *lo_it);

  spectra::SidebandFitOptions fit_opts;
  fit_opts.n_starts = cfg.n_starts;
  fit_opts.seed = opts.seed;
  fit_opts.nm = {cfg.tol, cfg.max_eval};
  const auto fit = spectra::fit_sidebands(spec, init, fit_opts);

  std::array<double, 3> nu{};
  for (int i = 0; i < 3; ++i) nu[i] = two_pi * cfg.trap_frequencies_khz[i] * 1e3;
  const auto th = spectra::thermometry(fit, nu);

  std::vector<std::vector<double>> curve;
  curve.reserve(spec.detuning.size());
  for (std::size_t k = 0; k < spec.detuning.size(); ++k)
    curve.push_back({spec.detuning[k], spec.transfer_probability[k],
                     fit.eval(spec.detuning[k])});
  csv::write_table(ctx.out("fit_curve.csv"),
                   {"detuning_hz", "transfer_probability", "model_probability"}, curve);

  nlohmann::json out;
  out["converged"] = fit.converged;
  out["residual"] = fit.residual;
  out["baseline"] = fit.baseline;
  for (int i = 0; i < 3; ++i) {
    out["cooling"].push_back(peak_json(fit.cooling[i]));
    out["heating"].push_back(peak_json(fit.heating[i]));
  }
  out["carrier"] = peak_json(fit.carrier);
  nlohmann::json thermo;
  for (int i = 0; i < 3; ++i) {
    thermo["sideband_ratio"].push_back(th.sideband_ratio[i]);
    thermo["nbar"].push_back(th.nbar_per_axis[i]);
    thermo["ground_fraction"].push_back(th.ground_fraction_per_axis[i]);
    thermo["temperature_uk"].push_back(th.temperature_per_axis[i] * 1e6);
  }
  thermo["infinite_temperature"] = th.infinite_temperature;
  thermo["mean_ground_fraction"] = th.mean_ground_fraction();
  out["thermometry"] = thermo;
  std::ofstream(ctx.out("fit_params.json")) << out.dump(2) << "\n";

  finish_command(ctx, {"fit_curve.csv", "fit_params.json"}, fit.converged);
  return fit.converged ? 0 : 2;
}

}  // namespace ramansim
