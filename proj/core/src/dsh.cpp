#include "ramankit/dsh.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <stdexcept>

#include "ramankit/constants.hpp"
#include "ramankit/csv.hpp"

namespace ramankit::dsh {

using constants::two_pi;

namespace {

// FFTW planning is not thread safe; execution of distinct plans is.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

struct PlanGuard {
  fftw_plan plan = nullptr;
  ~PlanGuard() {
    if (plan) {
      std::lock_guard<std::mutex> lock(fftw_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

bool is_pow2(std::size_t n) { return n >= 2 && std::has_single_bit(n); }

}  // namespace

double lorentzian_linewidth(double a_white) {
  return constants::pi * a_white * a_white;
}

void DshConfig::validate() const {
  if (!(sample_rate > 0.0)) throw std::invalid_argument("DshConfig: sample_rate <= 0");
  if (!(aom_offset > 0.0) || !(sample_rate > 4.0 * aom_offset))
    throw std::invalid_argument("DshConfig: need sample_rate > 4 aom_offset");
  if (!(fiber_delay >= 0.0)) throw std::invalid_argument("DshConfig: negative delay");
  if (!is_pow2(n_samples) || !is_pow2(segment_length))
    throw std::invalid_argument("DshConfig: sample counts must be powers of two");
  const std::size_t d = static_cast<std::size_t>(delay_samples());
  if (d * 10 > n_samples)
    throw std::invalid_argument("DshConfig: fiber_delay exceeds a tenth of the record");
  if (segment_length > n_samples - d)
    throw std::invalid_argument("DshConfig: segment_length exceeds the beat record");
  if (!(analysis_span > 0.0) || aom_offset + analysis_span >= 0.5 * sample_rate)
    throw std::invalid_argument("DshConfig: analysis span reaches past Nyquist");
}

int DshConfig::delay_samples() const {
  return static_cast<int>(std::llround(fiber_delay * sample_rate));
}

double DshConfig::delay_residual() const {
  return fiber_delay - delay_samples() / sample_rate;
}

std::vector<double> gen_frequency_noise(const NoiseAmplitudes& amps,
                                        std::size_t n_samples, double sample_rate,
                                        rng::Stream& stream) {
  if (!is_pow2(n_samples) || n_samples < 4)
    throw std::invalid_argument("gen_frequency_noise: n_samples must be a power of two >= 4");
  if (!(sample_rate > 0.0))
    throw std::invalid_argument("gen_frequency_noise: sample_rate <= 0");
  if (amps.a_white < 0.0 || amps.a_flicker < 0.0 || amps.a_randomwalk < 0.0)
    throw std::invalid_argument("gen_frequency_noise: negative amplitude");

  const std::size_t nh = n_samples / 2;
  const double df = sample_rate / static_cast<double>(n_samples);
  const double w2 = amps.a_white * amps.a_white;
  const double f2 = amps.a_flicker * amps.a_flicker;
  const double r2 = amps.a_randomwalk * amps.a_randomwalk;

  std::vector<std::complex<double>> half(nh + 1);
  std::vector<double> out(n_samples);

  PlanGuard guard;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    guard.plan = fftw_plan_dft_c2r_1d(static_cast<int>(n_samples),
                                      reinterpret_cast<fftw_complex*>(half.data()),
                                      out.data(), FFTW_ESTIMATE);
  }
  if (!guard.plan) throw std::runtime_error("gen_frequency_noise: FFTW plan failed");

  // |X_k|^2 averages to S(f_k) fs n / 2, so the inverse transform (divided
  // by n) has one-sided PSD S. The draw count per bin is fixed, so the same
  // stream state produces the same shapes for any amplitudes.
  half[0] = 0.0;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::size_t k = 1; k <= nh; ++k) {
    const double f = df * static_cast<double>(k);
    const double s = w2 + f2 / f + r2 / (f * f);
    const double mag = std::sqrt(s * sample_rate * static_cast<double>(n_samples) * 0.5);
    const double g1 = stream.normal();
    const double g2 = stream.normal();
    if (k < nh)
      half[k] = std::complex<double>(mag * g1 * inv_sqrt2, mag * g2 * inv_sqrt2);
    else
      half[k] = mag * g1 * inv_sqrt2;  // Nyquist bin is real
  }

  fftw_execute(guard.plan);
  const double scale = 1.0 / static_cast<double>(n_samples);
  for (double& v : out) v *= scale;
  return out;
}

std::vector<double> gen_phase_noise(const NoiseAmplitudes& amps, std::size_t n_samples,
                                    double sample_rate, rng::Stream& stream) {
  const std::vector<double> nu = gen_frequency_noise(amps, n_samples, sample_rate, stream);
  std::vector<double> phase(n_samples);
  const double dt = 1.0 / sample_rate;
  phase[0] = 0.0;
  for (std::size_t i = 1; i < n_samples; ++i)
    phase[i] = phase[i - 1] + two_pi * dt * nu[i - 1];
  return phase;
}

BeatSignal dsh_beat_signal(const std::vector<double>& phase, const DshConfig& cfg) {
  if (!(cfg.sample_rate > 0.0) || !(cfg.fiber_delay >= 0.0))
    throw std::invalid_argument("dsh_beat_signal: bad config");
  const int d = cfg.delay_samples();
  if (phase.size() <= static_cast<std::size_t>(d))
    throw std::invalid_argument("dsh_beat_signal: record shorter than the delay");

  BeatSignal out;
  out.delay_samples = d;
  out.delay_residual = cfg.delay_residual();
  out.samples.resize(phase.size() - static_cast<std::size_t>(d));
  const double dt = 1.0 / cfg.sample_rate;
  for (std::size_t i = static_cast<std::size_t>(d); i < phase.size(); ++i) {
    const double t = dt * static_cast<double>(i);
    out.samples[i - d] =
        std::cos(two_pi * cfg.aom_offset * t + phase[i] - phase[i - d]);
  }
  return out;
}

PsdSpectrum psd_welch(const std::vector<double>& signal, double sample_rate,
                      std::size_t segment_length, std::size_t n_overlap) {
  const std::size_t len = segment_length;
  if (len < 8 || len > signal.size())
    throw std::invalid_argument("psd_welch: segment_length must be in [8, signal length]");
  if (n_overlap >= len) throw std::invalid_argument("psd_welch: overlap >= segment");
  if (!(sample_rate > 0.0)) throw std::invalid_argument("psd_welch: sample_rate <= 0");

  std::vector<double> window(len);
  double wsum = 0.0, wsum2 = 0.0;
  for (std::size_t j = 0; j < len; ++j) {
    window[j] = 0.5 * (1.0 - std::cos(two_pi * static_cast<double>(j) /
                                      static_cast<double>(len)));
    wsum += window[j];
    wsum2 += window[j] * window[j];
  }

  const std::size_t nk = len / 2 + 1;
  std::vector<double> in(len);
  std::vector<std::complex<double>> spec(nk);
  PlanGuard guard;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    guard.plan = fftw_plan_dft_r2c_1d(static_cast<int>(len), in.data(),
                                      reinterpret_cast<fftw_complex*>(spec.data()),
                                      FFTW_ESTIMATE);
  }
  if (!guard.plan) throw std::runtime_error("psd_welch: FFTW plan failed");

  const std::size_t step = len - n_overlap;
  std::vector<double> accum(nk, 0.0);
  int n_seg = 0;
  for (std::size_t start = 0; start + len <= signal.size(); start += step) {
    for (std::size_t j = 0; j < len; ++j) in[j] = signal[start + j] * window[j];
    fftw_execute(guard.plan);
    for (std::size_t k = 0; k < nk; ++k) accum[k] += std::norm(spec[k]);
    ++n_seg;
  }

  PsdSpectrum out;
  out.n_segments = n_seg;
  out.resolution_bw = sample_rate * wsum2 / (wsum * wsum);
  out.freq.resize(nk);
  out.power.resize(nk);
  const double base = 1.0 / (sample_rate * wsum2 * static_cast<double>(n_seg));
  for (std::size_t k = 0; k < nk; ++k) {
    out.freq[k] = sample_rate * static_cast<double>(k) / static_cast<double>(len);
    const double onesided = (k == 0 || k == nk - 1) ? 1.0 : 2.0;
    out.power[k] = accum[k] * base * onesided;
  }
  return out;
}

PsdSpectrum simulate_beat_psd(const NoiseAmplitudes& amps, const DshConfig& cfg,
                              std::uint64_t seed) {
  cfg.validate();
  rng::Stream stream(rng::mix(seed, 0x0d5f));
  const std::vector<double> phase =
      gen_phase_noise(amps, cfg.n_samples, cfg.sample_rate, stream);
  const BeatSignal beat = dsh_beat_signal(phase, cfg);
  return psd_welch(beat.samples, cfg.sample_rate, cfg.segment_length,
                   cfg.segment_length / 2);
}

namespace {

double interp_log_power(const PsdSpectrum& psd, double f) {
  const auto it = std::lower_bound(psd.freq.begin(), psd.freq.end(), f);
  if (it == psd.freq.begin() || it == psd.freq.end())
    throw std::invalid_argument("fit_noise_amplitudes: target does not cover the span");
  const std::size_t hi = static_cast<std::size_t>(it - psd.freq.begin());
  const std::size_t lo = hi - 1;
  const double t = (f - psd.freq[lo]) / (psd.freq[hi] - psd.freq[lo]);
  const double p_lo = std::log10(std::max(psd.power[lo], 1e-300));
  const double p_hi = std::log10(std::max(psd.power[hi], 1e-300));
  return p_lo + t * (p_hi - p_lo);
}

}  // namespace

LinewidthEstimate fit_noise_amplitudes(const PsdSpectrum& target, const DshConfig& cfg,
                                       const NoiseAmplitudes& init, std::uint64_t seed,
                                       const FitNoiseOptions& opts) {
  cfg.validate();
  if (target.freq.size() < 2)
    throw std::invalid_argument("fit_noise_amplitudes: empty target");

  // simulation frequency grid is fixed by the config
  const std::size_t nk = cfg.segment_length / 2 + 1;
  const double df = cfg.sample_rate / static_cast<double>(cfg.segment_length);
  const double rbw = 1.5 * cfg.sample_rate / static_cast<double>(cfg.segment_length);

  std::vector<std::size_t> bins;
  std::vector<double> target_log;
  for (std::size_t k = 0; k < nk; ++k) {
    const double f = df * static_cast<double>(k);
    if (std::abs(f - cfg.aom_offset) > cfg.analysis_span) continue;
    if (std::abs(f - cfg.aom_offset) < rbw) continue;  // central bins excluded
    bins.push_back(k);
    target_log.push_back(interp_log_power(target, f));
  }
  if (bins.size() < 8)
    throw std::invalid_argument("fit_noise_amplitudes: analysis span too narrow");

  const std::uint64_t inner_seed = rng::mix(seed, 0xf17);
  const auto mse_for = [&](const NoiseAmplitudes& amps, std::uint64_t sim_seed) {
    const PsdSpectrum sim = simulate_beat_psd(amps, cfg, sim_seed);
    double acc = 0.0;
    for (std::size_t i = 0; i < bins.size(); ++i) {
      const double d =
          std::log10(std::max(sim.power[bins[i]], 1e-300)) - target_log[i];
      acc += d * d;
    }
    return acc / static_cast<double>(bins.size());
  };

  // parameters are sqrt-amplitudes so the amplitudes stay non-negative
  const auto objective_with_seed = [&](std::span<const double> u, std::uint64_t s) {
    return mse_for({u[0] * u[0], u[1] * u[1], u[2] * u[2]}, s);
  };

  std::vector<double> u0 = {std::sqrt(init.a_white), std::sqrt(init.a_flicker),
                            std::sqrt(init.a_randomwalk)};
  if (u0[0] == 0.0 && u0[1] == 0.0 && u0[2] == 0.0) {
    // coarse log-spaced presearch when no starting point is supplied
    const double levels[3] = {1.0, 10.0, 100.0};
    double best = std::numeric_limits<double>::infinity();
    for (double uw : levels)
      for (double uf : levels)
        for (double ur : levels) {
          const double v[3] = {uw, uf, ur};
          const double m = objective_with_seed(std::span<const double>(v, 3), inner_seed);
          if (m < best) {
            best = m;
            u0 = {uw, uf, ur};
          }
        }
  }

  const auto run_fit = [&](std::uint64_t s, std::span<const double> start) {
    const auto obj = [&](std::span<const double> u) { return objective_with_seed(u, s); };
    std::vector<double> scale(3);
    for (int i = 0; i < 3; ++i) scale[i] = 0.3 * std::abs(start[i]) + 0.3;
    return optim::nelder_mead(obj, start, scale, opts.nm);
  };

  LinewidthEstimate est;
  est.fit = run_fit(inner_seed, u0);
  const auto amps_of = [](std::span<const double> u) {
    return NoiseAmplitudes{u[0] * u[0], u[1] * u[1], u[2] * u[2]};
  };
  est.amplitudes = amps_of(est.fit.params);
  est.lorentzian_hz = lorentzian_linewidth(est.amplitudes.a_white);

  if (opts.n_refits > 0) {
    // restart from u0, not the minimum: a restart at the minimum can stall
    // inside the stopping tolerance and report zero spread
    double sum = 0.0, sum2 = 0.0;
    for (int r = 1; r <= opts.n_refits; ++r) {
      const optim::FitResult fr = run_fit(rng::mix(seed, 0xf17, r), u0);
      const double lw = lorentzian_linewidth(fr.params[0] * fr.params[0]);
      sum += lw;
      sum2 += lw * lw;
    }
    const double n = opts.n_refits;
    const double var = std::max(0.0, sum2 / n - (sum / n) * (sum / n));
    est.lorentzian_err_hz = std::sqrt(var);
  }

  // isolated lineshape width of each non-negligible colored component
  const auto component_visible = [&](double level_at_1hz, int power) {
    for (std::size_t i = 0; i < bins.size(); ++i) {
      const double f = df * static_cast<double>(bins[i]);
      const double comp = level_at_1hz / std::pow(f, power);
      const double total = est.amplitudes.a_white * est.amplitudes.a_white +
                           est.amplitudes.a_flicker * est.amplitudes.a_flicker / f +
                           est.amplitudes.a_randomwalk * est.amplitudes.a_randomwalk /
                               (f * f);
      if (total > 0.0 && comp > 0.05 * total) return true;
    }
    return false;
  };
  const double af2 = est.amplitudes.a_flicker * est.amplitudes.a_flicker;
  const double ar2 = est.amplitudes.a_randomwalk * est.amplitudes.a_randomwalk;
  if (component_visible(af2, 1)) {
    const PsdSpectrum iso =
        simulate_beat_psd({0.0, est.amplitudes.a_flicker, 0.0}, cfg, inner_seed);
    est.gaussian_flicker_hz = measure_fwhm(iso, cfg.aom_offset, cfg.analysis_span);
  }
  if (component_visible(ar2, 2)) {
    const PsdSpectrum iso =
        simulate_beat_psd({0.0, 0.0, est.amplitudes.a_randomwalk}, cfg, inner_seed);
    est.randomwalk_hz = measure_fwhm(iso, cfg.aom_offset, cfg.analysis_span);
  }
  return est;
}

double measure_fwhm(const PsdSpectrum& psd, double f_center, double half_span) {
  std::size_t lo = 0, hi = psd.freq.size();
  while (lo < hi && psd.freq[lo] < f_center - half_span) ++lo;
  while (hi > lo && psd.freq[hi - 1] > f_center + half_span) --hi;
  if (hi - lo < 5) throw std::invalid_argument("measure_fwhm: span too narrow");

  std::size_t peak = lo;
  for (std::size_t k = lo; k < hi; ++k)
    if (psd.power[k] > psd.power[peak]) peak = k;
  const double half = 0.5 * psd.power[peak];

  const auto cross = [&](bool right) {
    std::size_t k = peak;
    while (true) {
      const std::size_t next = right ? k + 1 : k - 1;
      if (next >= hi || next < lo || (!right && k == lo))
        throw std::runtime_error("measure_fwhm: half maximum not reached in span");
      if (psd.power[next] < half) {
        const double t = (psd.power[k] - half) / (psd.power[k] - psd.power[next]);
        return psd.freq[k] + t * (psd.freq[next] - psd.freq[k]);
      }
      k = next;
    }
  };
  return cross(true) - cross(false);
}

double ripple_spacing(const PsdSpectrum& psd, double f_lo, double f_hi) {
  std::vector<double> freq, logp;
  for (std::size_t k = 0; k < psd.freq.size(); ++k) {
    if (psd.freq[k] < f_lo || psd.freq[k] > f_hi) continue;
    freq.push_back(psd.freq[k]);
    logp.push_back(std::log10(std::max(psd.power[k], 1e-300)));
  }
  const std::size_t n = logp.size();
  if (n < 32) throw std::invalid_argument("ripple_spacing: window too narrow");

  // light smoothing so bin noise does not create spurious maxima
  constexpr int kHalf = 4;
  std::vector<double> smooth(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    int cnt = 0;
    for (int j = -kHalf; j <= kHalf; ++j) {
      const long idx = static_cast<long>(i) + j;
      if (idx < 0 || idx >= static_cast<long>(n)) continue;
      acc += logp[static_cast<std::size_t>(idx)];
      ++cnt;
    }
    smooth[i] = acc / cnt;
  }

  std::vector<double> maxima;
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (smooth[i] > smooth[i - 1] && smooth[i] >= smooth[i + 1])
      maxima.push_back(freq[i]);
  if (maxima.size() < 3)
    throw std::runtime_error("ripple_spacing: fewer than three ripples found");

  std::vector<double> gaps(maxima.size() - 1);
  for (std::size_t i = 0; i + 1 < maxima.size(); ++i)
    gaps[i] = maxima[i + 1] - maxima[i];
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  return gaps[gaps.size() / 2];
}

PsdSpectrum PsdSpectrum::load_csv(const std::string& path) {
  const csv::Table table = csv::read_table(path);
  const std::size_t c_f = table.column("freq_hz");
  const std::size_t c_p = table.column("power_db");
  PsdSpectrum psd;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const double f = table.rows[i][c_f];
    if (!psd.freq.empty() && !(f > psd.freq.back()))
      throw std::runtime_error(path + ": row " + std::to_string(i + 1) +
                               ": freq_hz not strictly increasing");
    psd.freq.push_back(f);
    psd.power.push_back(std::pow(10.0, table.rows[i][c_p] / 10.0));
  }
  if (psd.freq.empty()) throw std::runtime_error(path + ": no data rows");
  return psd;
}

void PsdSpectrum::save_csv(const std::string& path) const {
  std::vector<std::vector<double>> rows;
  rows.reserve(freq.size());
  for (std::size_t i = 0; i < freq.size(); ++i)
    rows.push_back({freq[i], 10.0 * std::log10(std::max(power[i], 1e-300))});
  csv::write_table(path, {"freq_hz", "power_db"}, rows);
}

}  // namespace ramankit::dsh
