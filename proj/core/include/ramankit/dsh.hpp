#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ramankit/optim.hpp"
#include "ramankit/rng.hpp"

// Delayed self-heterodyne linewidth analysis: synthesize laser phase noise
// from white / flicker / random-walk frequency-noise components, build the
// delayed beat signal, estimate its PSD (Welch), and fit the component
// amplitudes of a simulated spectrum to a target spectrum.

namespace ramankit::dsh {

// One-sided frequency-noise PSD model, f_ref = 1 Hz:
//   S_nu(f) = a_white^2 + a_flicker^2 (f_ref/f) + a_randomwalk^2 (f_ref/f)^2
// in Hz^2/Hz. The white level sets the Lorentzian linewidth via
// lorentzian_linewidth = pi a_white^2.
struct NoiseAmplitudes {
  double a_white = 0.0;
  double a_flicker = 0.0;
  double a_randomwalk = 0.0;
};

double lorentzian_linewidth(double a_white);

struct DshConfig {
  double aom_offset = 2.5e6;     // Hz, beat carrier (interferometer AOM shift)
  double fiber_delay = 24.0e-6;  // s, delay arm
  double sample_rate = 12.5e6;   // Hz, > 4 aom_offset
  std::size_t n_samples = std::size_t{1} << 20;       // power of two
  std::size_t segment_length = std::size_t{1} << 15;  // Welch segment, power of two
  double analysis_span = 2.0e6;  // Hz, fit window half-width around aom_offset

  void validate() const;
  int delay_samples() const;      // fiber_delay rounded to samples
  double delay_residual() const;  // s, fiber_delay - delay_samples/sample_rate
};

struct PsdSpectrum {
  std::vector<double> freq;   // Hz, ascending, DC to Nyquist
  std::vector<double> power;  // linear, signal_units^2/Hz, one-sided
  double resolution_bw = 0.0; // Hz, equivalent noise bandwidth of the window
  int n_segments = 0;

  // CSV with columns freq_hz, power_db (10 log10 of the linear density)
  static PsdSpectrum load_csv(const std::string& path);
  void save_csv(const std::string& path) const;
};

// Frequency-noise series (Hz) with the one-sided PSD of `amps`, generated by
// spectral shaping of Gaussian noise on the FFT grid; the DC bin is zeroed.
// n_samples must be a power of two.
std::vector<double> gen_frequency_noise(const NoiseAmplitudes& amps,
                                        std::size_t n_samples, double sample_rate,
                                        rng::Stream& stream);

// Phase series (radians): cumulative integral of 2 pi times the frequency
// noise, starting at zero.
std::vector<double> gen_phase_noise(const NoiseAmplitudes& amps, std::size_t n_samples,
                                    double sample_rate, rng::Stream& stream);

struct BeatSignal {
  std::vector<double> samples;  // starts one full delay into the record
  int delay_samples = 0;
  double delay_residual = 0.0;  // s
};

// v(t) = cos(2 pi aom_offset t + phi(t) - phi(t - tau_d)) with tau_d rounded
// to whole samples.
BeatSignal dsh_beat_signal(const std::vector<double>& phase, const DshConfig& cfg);

// Welch PSD: mean of Hann-windowed periodograms over segments advanced by
// segment_length - n_overlap. One-sided normalization; integrating the
// result over frequency recovers the signal variance.
PsdSpectrum psd_welch(const std::vector<double>& signal, double sample_rate,
                      std::size_t segment_length, std::size_t n_overlap);

// Full chain with a stream derived from `seed`: phase noise, delayed beat,
// Welch PSD at 50% overlap.
PsdSpectrum simulate_beat_psd(const NoiseAmplitudes& amps, const DshConfig& cfg,
                              std::uint64_t seed);

struct LinewidthEstimate {
  NoiseAmplitudes amplitudes;
  double lorentzian_hz = 0.0;        // pi a_white^2
  double gaussian_flicker_hz = 0.0;  // FWHM of the isolated flicker lineshape
  double randomwalk_hz = 0.0;        // FWHM of the isolated random-walk lineshape
  double lorentzian_err_hz = 0.0;    // refit spread, 0 unless n_refits > 0
  optim::FitResult fit;              // params are sqrt-amplitudes
};

struct FitNoiseOptions {
  int n_refits = 0;  // extra fits with fresh inner seeds for the uncertainty
  optim::NelderMeadOptions nm{1e-4, 400};
};

// Adjusts (a_white, a_flicker, a_randomwalk) so the log-PSD of a simulation
// with a fixed inner seed matches the target log-PSD over
// aom_offset +- analysis_span (the bins within one resolution bandwidth of
// the carrier are excluded). The target is interpolated onto the simulation
// grid and must cover the span. Optimized with Nelder-Mead over the square
// roots of the amplitudes; non-convergence is reported via fit.converged
// with the best point found.
LinewidthEstimate fit_noise_amplitudes(const PsdSpectrum& target, const DshConfig& cfg,
                                       const NoiseAmplitudes& init, std::uint64_t seed,
                                       const FitNoiseOptions& opts = {});

// Full width at half maximum of the tallest peak within
// [f_center - half_span, f_center + half_span], crossings interpolated
// linearly between bins.
double measure_fwhm(const PsdSpectrum& psd, double f_center, double half_span);

// Median spacing of the local maxima of the smoothed log-PSD between f_lo
// and f_hi; for a coherent-regime DSH wing this is the 1/tau_d ripple period.
double ripple_spacing(const PsdSpectrum& psd, double f_lo, double f_hi);

}  // namespace ramankit::dsh
