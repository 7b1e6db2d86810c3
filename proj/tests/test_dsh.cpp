#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "ramankit/constants.hpp"
#include "ramankit/dsh.hpp"
#include "ramankit/optim.hpp"
#include "ramankit/rng.hpp"

using namespace ramankit;

namespace {

const double kFs = 12.5e6;

double band_avg(const dsh::PsdSpectrum& psd, double f1, double f2,
                bool weight_f2 = false) {
  double acc = 0.0;
  int cnt = 0;
  for (std::size_t k = 0; k < psd.freq.size(); ++k) {
    const double f = psd.freq[k];
    if (f < f1 || f >= f2) continue;
    acc += weight_f2 ? psd.power[k] * f * f : psd.power[k];
    ++cnt;
  }
  REQUIRE(cnt >= 8);
  return acc / cnt;
}

double db(double ratio) { return 10.0 * std::log10(ratio); }

dsh::PsdSpectrum welch_of(const std::vector<double>& x, std::size_t seg) {
  return dsh::psd_welch(x, kFs, seg, seg / 2);
}

}  // namespace

TEST_CASE("white frequency noise synthesizes a flat one sided psd") {
  const double aw = 40.0;
  rng::Stream rs(100);
  const auto x = dsh::gen_frequency_noise({aw, 0.0, 0.0}, std::size_t{1} << 18, kFs, rs);
  const auto psd = welch_of(x, std::size_t{1} << 14);

  // octave band averages flat within 1 dB over two decades
  for (double f1 = 10e3; f1 < 1.3e6; f1 *= 2.0)
    CHECK(std::abs(db(band_avg(psd, f1, 2 * f1) / (aw * aw))) < 1.0);

  // the record integrates to the analytic variance (Parseval)
  double var = 0.0, mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  CHECK(std::abs(mean) < 1e-6 * aw);
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(x.size());
  CHECK(var == doctest::Approx(aw * aw * kFs / 2).epsilon(0.02));

  double integral = 0.0;
  const double dfreq = psd.freq[1] - psd.freq[0];
  for (double p : psd.power) integral += p * dfreq;
  CHECK(integral == doctest::Approx(var).epsilon(0.02));
}

TEST_CASE("flicker and random walk components fall at their power laws") {
  rng::Stream rs(101);
  const auto xf =
      dsh::gen_frequency_noise({0.0, 100.0, 0.0}, std::size_t{1} << 18, kFs, rs);
  const auto pf = welch_of(xf, std::size_t{1} << 14);
  // 1/f: average over [f1, 2 f1] scales as 1/f1, so 5 octaves give 32
  CHECK(band_avg(pf, 10e3, 20e3) / band_avg(pf, 320e3, 640e3) ==
        doctest::Approx(32.0).epsilon(0.15));

  rng::Stream rs2(102);
  const auto xr =
      dsh::gen_frequency_noise({0.0, 0.0, 1000.0}, std::size_t{1} << 18, kFs, rs2);
  const auto pr = welch_of(xr, std::size_t{1} << 14);
  CHECK(band_avg(pr, 10e3, 20e3) / band_avg(pr, 320e3, 640e3) ==
        doctest::Approx(1024.0).epsilon(0.25));
}

TEST_CASE("amplitude scaling reuses the same spectral draws") {
  rng::Stream a(55), b(55);
  const auto x1 = dsh::gen_frequency_noise({40.0, 0.0, 0.0}, 4096, kFs, a);
  const auto x2 = dsh::gen_frequency_noise({80.0, 0.0, 0.0}, 4096, kFs, b);
  for (std::size_t i = 0; i < x1.size(); i += 7) {
    if (std::abs(x1[i]) < 1e-9) continue;
    CHECK(x2[i] / x1[i] == doctest::Approx(2.0).epsilon(1e-9));
  }
}

TEST_CASE("phase noise integrates the frequency noise") {
  const double aw = 50.0;
  rng::Stream rs(103);
  const auto phi = dsh::gen_phase_noise({aw, 0.0, 0.0}, std::size_t{1} << 18, kFs, rs);
  CHECK(phi[0] == 0.0);
  const auto psd = welch_of(phi, std::size_t{1} << 14);

  // S_phi(f) f^2 = S_nu within 1 dB below fs/8 (integrator transfer)
  for (double f1 = 20e3; f1 < 1.3e6; f1 *= 2.0)
    CHECK(std::abs(db(band_avg(psd, f1, 2 * f1, true) / (aw * aw))) < 1.0);

  rng::Stream rz(104);
  const auto none = dsh::gen_phase_noise({0.0, 0.0, 0.0}, 4096, kFs, rz);
  for (double v : none) CHECK(v == 0.0);
}

TEST_CASE("quiet laser produces a pure beat tone at the offset") {
  dsh::DshConfig cfg;
  cfg.n_samples = std::size_t{1} << 16;
  cfg.validate();
  const std::vector<double> phase(cfg.n_samples, 0.0);
  const auto beat = dsh::dsh_beat_signal(phase, cfg);
  CHECK(beat.delay_samples == 300);
  CHECK(beat.samples.size() == cfg.n_samples - 300);

  double power = 0.0;
  for (double v : beat.samples) power += v * v;
  power /= static_cast<double>(beat.samples.size());
  CHECK(power == doctest::Approx(0.5).epsilon(1e-3));

  const auto psd = dsh::psd_welch(beat.samples, cfg.sample_rate,
                                  std::size_t{1} << 13, std::size_t{1} << 12);
  // all of the power concentrates around the aom offset
  const double dfreq = psd.freq[1] - psd.freq[0];
  double near = 0.0, total = 0.0;
  for (std::size_t k = 0; k < psd.freq.size(); ++k) {
    total += psd.power[k] * dfreq;
    if (std::abs(psd.freq[k] - cfg.aom_offset) < 25e3) near += psd.power[k] * dfreq;
  }
  CHECK(near / total > 0.999);
  CHECK(total == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("zero delay cancels the phase noise entirely") {
  dsh::DshConfig cfg;
  cfg.fiber_delay = 0.0;
  cfg.n_samples = std::size_t{1} << 16;
  cfg.validate();
  rng::Stream rs(105);
  const auto phi = dsh::gen_phase_noise({200.0, 0.0, 0.0}, cfg.n_samples, kFs, rs);
  const auto beat = dsh::dsh_beat_signal(phi, cfg);
  CHECK(beat.samples.size() == cfg.n_samples);
  // phi(t) - phi(t - 0) = 0: the beat is the bare carrier
  for (std::size_t i = 0; i < beat.samples.size(); i += 97) {
    const double expected =
        std::cos(2.0 * constants::pi * cfg.aom_offset * (static_cast<double>(i) / kFs));
    CHECK(beat.samples[i] == doctest::Approx(expected).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("welch variance shrinks with the segment count") {
  const std::size_t seg = std::size_t{1} << 13;
  rng::Stream r1(106), r2(107);
  const auto xa = dsh::gen_frequency_noise({30.0, 0.0, 0.0}, std::size_t{1} << 17, kFs, r1);
  const auto xb = dsh::gen_frequency_noise({30.0, 0.0, 0.0}, std::size_t{1} << 18, kFs, r2);
  const auto pa = welch_of(xa, seg);
  const auto pb = welch_of(xb, seg);
  CHECK(pa.n_segments == 31);
  CHECK(pb.n_segments == 63);
  CHECK(pa.resolution_bw == doctest::Approx(1.5 * kFs / seg).epsilon(1e-9));

  auto rel_var = [](const dsh::PsdSpectrum& p) {
    double m = 0.0, v = 0.0;
    int n = 0;
    for (std::size_t k = 0; k < p.freq.size(); ++k) {
      if (p.freq[k] < 50e3 || p.freq[k] > 6e6) continue;
      m += p.power[k];
      ++n;
    }
    m /= n;
    for (std::size_t k = 0; k < p.freq.size(); ++k) {
      if (p.freq[k] < 50e3 || p.freq[k] > 6e6) continue;
      v += (p.power[k] - m) * (p.power[k] - m);
    }
    return v / n / (m * m);
  };
  const double ratio = rel_var(pa) / rel_var(pb);
  CHECK(ratio > 1.6);
  CHECK(ratio < 2.5);
}

TEST_CASE("beat spectrum is symmetric about the carrier") {
  dsh::DshConfig cfg;
  cfg.n_samples = std::size_t{1} << 18;
  cfg.segment_length = std::size_t{1} << 13;
  const auto psd = dsh::simulate_beat_psd({30.0, 0.0, 0.0}, cfg, 2024);
  const double lo_side =
      band_avg(psd, cfg.aom_offset - 250e3, cfg.aom_offset - 50e3);
  const double hi_side =
      band_avg(psd, cfg.aom_offset + 50e3, cfg.aom_offset + 250e3);
  CHECK(lo_side / hi_side == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("beat psd simulation is seed deterministic") {
  dsh::DshConfig cfg;
  cfg.n_samples = std::size_t{1} << 16;
  cfg.segment_length = std::size_t{1} << 12;
  const dsh::NoiseAmplitudes amps{20.0, 5.0, 100.0};
  const auto p1 = dsh::simulate_beat_psd(amps, cfg, 9);
  const auto p2 = dsh::simulate_beat_psd(amps, cfg, 9);
  const auto p3 = dsh::simulate_beat_psd(amps, cfg, 10);
  CHECK(p1.power == p2.power);
  CHECK(p1.freq == p2.freq);
  CHECK(p1.power != p3.power);
}

TEST_CASE("config validation enforces the sampling geometry") {
  dsh::DshConfig good;
  CHECK_NOTHROW(good.validate());
  CHECK(good.delay_samples() == 300);
  CHECK(std::abs(good.delay_residual()) < 1e-12);

  dsh::DshConfig off = good;
  off.fiber_delay = 24.02e-6;
  CHECK(off.delay_samples() == 300);
  CHECK(off.delay_residual() == doctest::Approx(2e-8).epsilon(1e-6));

  dsh::DshConfig bad = good;
  bad.sample_rate = 9e6;  // < 4 aom_offset
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = good;
  bad.n_samples = 3072;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = good;
  bad.n_samples = 2048;  // ten delays no longer fit
  bad.segment_length = 1024;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = good;
  bad.segment_length = bad.n_samples;  // no room after the delay
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = good;
  bad.analysis_span = 5e6;  // reaches past Nyquist
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("welch input validation") {
  std::vector<double> x(1024, 0.0);
  CHECK_THROWS_AS(dsh::psd_welch(x, kFs, 4, 2), std::invalid_argument);
  CHECK_THROWS_AS(dsh::psd_welch(x, kFs, 2048, 1024), std::invalid_argument);
  CHECK_THROWS_AS(dsh::psd_welch(x, kFs, 256, 256), std::invalid_argument);
  CHECK_THROWS_AS(dsh::psd_welch(x, -1.0, 256, 128), std::invalid_argument);
}

TEST_CASE("fwhm measurement on a synthetic lorentzian line") {
  dsh::PsdSpectrum psd;
  const optim::LorentzianPeak line{1e6, 50e3, 1.0};
  for (double f = 0.0; f <= 2e6; f += 1e3) {
    psd.freq.push_back(f);
    psd.power.push_back(optim::lorentzian_eval(line, f) + 1e-6);
  }
  CHECK(dsh::measure_fwhm(psd, 1e6, 300e3) == doctest::Approx(50e3).epsilon(0.01));
  CHECK_THROWS_AS(dsh::measure_fwhm(psd, 1e6, 1.5e3), std::invalid_argument);

  dsh::PsdSpectrum flat;
  for (double f = 0.0; f <= 2e6; f += 1e3) {
    flat.freq.push_back(f);
    flat.power.push_back(1.0);
  }
  CHECK_THROWS_AS(dsh::measure_fwhm(flat, 1e6, 300e3), std::runtime_error);
}

TEST_CASE("ripple spacing recovers the delay line period") {
  dsh::PsdSpectrum psd;
  const double period = 1.0 / 24e-6;  // 41.667 kHz
  for (double f = 1e6; f <= 2e6; f += 500.0) {
    psd.freq.push_back(f);
    psd.power.push_back(1e-6 * (1.0 + 0.8 * std::cos(2 * constants::pi * f / period)));
  }
  CHECK(dsh::ripple_spacing(psd, 1.05e6, 1.95e6) ==
        doctest::Approx(period).epsilon(0.02));
  CHECK_THROWS_AS(dsh::ripple_spacing(psd, 1.0e6, 1.01e6), std::invalid_argument);

  dsh::PsdSpectrum smooth;
  for (double f = 1e6; f <= 2e6; f += 500.0) {
    smooth.freq.push_back(f);
    smooth.power.push_back(std::exp(-f / 1e5));
  }
  CHECK_THROWS(dsh::ripple_spacing(smooth, 1.05e6, 1.95e6));
}

TEST_CASE("psd csv round trips through decibels") {
  const std::string path = "test_dsh_tmp.csv";
  dsh::PsdSpectrum psd;
  for (double f = 0.0; f <= 1e5; f += 12.5e3) {
    psd.freq.push_back(f);
    psd.power.push_back(1e-9 * (1.0 + f / 1e5));
  }
  psd.resolution_bw = 100.0;
  psd.n_segments = 4;
  psd.save_csv(path);
  const auto back = dsh::PsdSpectrum::load_csv(path);
  REQUIRE(back.freq.size() == psd.freq.size());
  for (std::size_t i = 0; i < psd.freq.size(); ++i) {
    CHECK(back.freq[i] == psd.freq[i]);
    CHECK(back.power[i] == doctest::Approx(psd.power[i]).epsilon(1e-12));
  }
  std::remove(path.c_str());

  {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    REQUIRE(fp != nullptr);
    std::fputs("freq_hz,power_db\n0,-90\n100,-91\n50,-92\n", fp);
    std::fclose(fp);
  }
  CHECK_THROWS_AS(dsh::PsdSpectrum::load_csv(path), std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("noise amplitude fit recovers a white noise linewidth") {
  dsh::DshConfig cfg;
  cfg.n_samples = std::size_t{1} << 17;
  cfg.segment_length = std::size_t{1} << 13;
  const double target_linewidth = 500.0;
  const double aw = std::sqrt(target_linewidth / constants::pi);
  const auto target = dsh::simulate_beat_psd({aw, 0.0, 0.0}, cfg, 101);

  const auto est = dsh::fit_noise_amplitudes(target, cfg, {0.0, 0.0, 0.0}, 7);
  CHECK(est.fit.converged);
  CHECK(est.lorentzian_hz ==
        doctest::Approx(constants::pi * est.amplitudes.a_white *
                        est.amplitudes.a_white)
            .epsilon(1e-12));
  CHECK(est.lorentzian_hz == doctest::Approx(target_linewidth).epsilon(0.25));
  CHECK(est.lorentzian_err_hz == 0.0);  // no refits requested
}

TEST_CASE("refits produce a linewidth spread estimate") {
  dsh::DshConfig cfg;
  cfg.n_samples = std::size_t{1} << 16;
  cfg.segment_length = std::size_t{1} << 12;
  const auto target = dsh::simulate_beat_psd({15.0, 0.0, 0.0}, cfg, 55);
  dsh::FitNoiseOptions opts;
  opts.n_refits = 2;
  opts.nm.max_eval = 150;
  const auto est = dsh::fit_noise_amplitudes(target, cfg, {15.0, 0.0, 0.0}, 3, opts);
  CHECK(est.lorentzian_err_hz >= 0.0);
  CHECK(std::isfinite(est.lorentzian_err_hz));
  CHECK(est.lorentzian_hz > 0.0);
}
