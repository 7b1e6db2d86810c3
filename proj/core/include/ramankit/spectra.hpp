#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ramankit/optim.hpp"
#include "ramankit/rng.hpp"

// Raman sideband spectra: seven-Lorentzian model (one cooling and one heating
// sideband per axis plus the carrier), least-squares fitting, and the
// sideband-imbalance thermometry that turns the fitted amplitudes into mean
// occupation, ground state fraction and temperature per axis.

namespace ramankit::spectra {

struct RamanSpectrum {
  std::vector<double> detuning;              // Hz, two-photon detuning, strictly increasing
  std::vector<double> transfer_probability;  // in [0, 1]
  int trials_per_point = 0;                  // 0 when unknown

  static RamanSpectrum make(std::vector<double> detuning,
                            std::vector<double> transfer_probability,
                            int trials_per_point);

  // CSV with columns detuning_hz, transfer_probability, trials. Malformed
  // rows are reported as "path:line: message".
  static RamanSpectrum load_csv(const std::string& path);
  void save_csv(const std::string& path) const;
};

struct SidebandFit {
  std::array<optim::LorentzianPeak, 3> cooling;  // centers > 0, one per axis
  std::array<optim::LorentzianPeak, 3> heating;  // centers < 0
  optim::LorentzianPeak carrier;                 // center within one linewidth of 0
  double baseline = 0.0;                         // in [0, 1]
  double residual = 0.0;                         // sum of squared residuals
  bool converged = false;

  std::array<optim::LorentzianPeak, 7> all_peaks() const;
  double eval(double detuning_hz) const;
};

struct SidebandFitOptions {
  int n_starts = 8;               // jittered restarts, best kept
  std::uint64_t seed = 12345;     // jitter seed
  optim::NelderMeadOptions nm{1e-10, 60000};
};

// Least-squares fit of the 22 free parameters (7 x (center, fwhm, amplitude)
// + baseline). Widths and amplitudes are folded to non-negative values; the
// carrier center is penalty-constrained to 0 +- one carrier linewidth and the
// baseline to [0, 1]. Needs at least 15 data points. Non-convergence is
// reported through `converged` with the best residual found.
SidebandFit fit_sidebands(const RamanSpectrum& spec, const SidebandFit& init,
                          const SidebandFitOptions& opts = {});

struct ThermometryResult {
  std::array<double, 3> sideband_ratio;       // r = A_cooling / A_heating
  std::array<double, 3> nbar_per_axis;        // r / (1 - r)
  std::array<double, 3> ground_fraction_per_axis;  // 1 / (1 + nbar)
  std::array<double, 3> temperature_per_axis;      // K, hbar nu / (kB ln(1 + 1/nbar))
  bool infinite_temperature = false;  // some axis has r >= 1 (no cooling signature)

  double mean_ground_fraction() const;
};

// Pairs each cooling peak with the heating peak of matching |center| (within
// 10%), assigns pairs to axes by closeness to nu/2pi, and applies the thermal
// state relations. Requires positive heating amplitudes; axes with r >= 1 get
// nbar = inf, P0 = 0, T = inf and set the infinite_temperature flag.
ThermometryResult thermometry(const SidebandFit& fit,
                              const std::array<double, 3>& nu_per_axis);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

// Wilson score interval for a binomial proportion at the given two-sided
// confidence level.
Interval binomial_ci(int successes, int trials, double level = 0.68);

// Samples transfer probabilities from the model: at each detuning the success
// count is binomial(trials_per_point, model probability). trials_per_point = 0
// returns the noiseless model curve.
RamanSpectrum synthesize_spectrum(const SidebandFit& truth,
                                  const std::vector<double>& detuning_hz,
                                  int trials_per_point, rng::Stream& stream);

}  // namespace ramankit::spectra
