#include <array>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "ramankit/constants.hpp"
#include "ramankit/rng.hpp"
#include "ramankit/spectra.hpp"

using namespace ramankit;
using constants::two_pi;

namespace {

// Phi^-1(0.84) and Phi^-1(0.975), the one-sided quantiles behind 68% and 95%
// two-sided intervals
const double z68 = 0.994457883209753;
const double z95 = 1.959963984540054;

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> g;
  for (double v = lo; v <= hi + 0.5 * step; v += step) g.push_back(v);
  return g;
}

spectra::SidebandFit truth_fit() {
  spectra::SidebandFit t{};
  t.cooling = {{{350e3, 30e3, 0.30}, {255e3, 30e3, 0.25}, {180e3, 30e3, 0.20}}};
  t.heating = {{{-350e3, 30e3, 0.26}, {-255e3, 30e3, 0.20}, {-180e3, 30e3, 0.15}}};
  t.carrier = {0.0, 40e3, 0.50};
  t.baseline = 0.05;
  return t;
}

spectra::SidebandFit perturb(const spectra::SidebandFit& t) {
  spectra::SidebandFit init = t;
  for (int i = 0; i < 3; ++i) {
    init.cooling[i].center *= 1.05;
    init.cooling[i].amplitude *= 0.7;
    init.cooling[i].fwhm *= 1.3;
    init.heating[i].center *= 1.05;
    init.heating[i].amplitude *= 0.7;
    init.heating[i].fwhm *= 1.3;
  }
  init.carrier.center = 5e3;
  init.carrier.amplitude *= 0.8;
  init.baseline = 0.0;
  return init;
}

double sse_against(const spectra::SidebandFit& f, const spectra::RamanSpectrum& spec) {
  double s = 0.0;
  for (std::size_t i = 0; i < spec.detuning.size(); ++i) {
    const double r = f.eval(spec.detuning[i]) - spec.transfer_probability[i];
    s += r * r;
  }
  return s;
}

// P(X >= k) for X ~ Binomial(n, p), via log factorials
double binom_tail_ge(int k, int n, double p) {
  double s = 0.0;
  for (int i = k; i <= n; ++i)
    s += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) -
                  std::lgamma(n - i + 1.0) + i * std::log(p) +
                  (n - i) * std::log1p(-p));
  return s;
}

// Clopper-Pearson bounds by bisection on the exact tails
spectra::Interval clopper_pearson(int k, int n, double level) {
  const double tail = 0.5 * (1.0 - level);
  spectra::Interval out{0.0, 1.0};
  if (k > 0) {
    double lo = 1e-12, hi = 1.0 - 1e-12;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (binom_tail_ge(k, n, mid) < tail ? lo : hi) = mid;
    }
    out.low = 0.5 * (lo + hi);
  }
  if (k < n) {
    double lo = 1e-12, hi = 1.0 - 1e-12;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (1.0 - binom_tail_ge(k + 1, n, mid) < tail ? hi : lo) = mid;
    }
    out.high = 0.5 * (lo + hi);
  }
  return out;
}

}  // namespace

TEST_CASE("wilson interval carries the normal quantile of the level") {
  // at phat = 1/2 the interval is symmetric and its half width is an
  // explicit function of z, which pins the inverse normal CDF value
  for (const auto& [level, z] : {std::pair{0.68, z68}, std::pair{0.95, z95}}) {
    const auto ci = spectra::binomial_ci(50, 100, level);
    CHECK(ci.low + ci.high == doctest::Approx(1.0).epsilon(1e-12));
    const double n = 100.0;
    const double expect_half =
        z * std::sqrt(0.25 / n + z * z / (4 * n * n)) / (1.0 + z * z / n);
    CHECK(0.5 * (ci.high - ci.low) == doctest::Approx(expect_half).epsilon(1e-12));
  }
}

TEST_CASE("wilson interval tracks the exact binomial interval") {
  struct Case {
    int k, n;
  };
  for (const Case& c : {Case{50, 100}, Case{10, 100}, Case{90, 100},
                        Case{500, 1000}, Case{3, 50}}) {
    const auto w = spectra::binomial_ci(c.k, c.n, 0.68);
    const auto cp = clopper_pearson(c.k, c.n, 0.68);
    CHECK(std::abs(w.low - cp.low) < 0.02);
    CHECK(std::abs(w.high - cp.high) < 0.02);
    CHECK(w.low < static_cast<double>(c.k) / c.n);
    CHECK(w.high > static_cast<double>(c.k) / c.n);
  }
}

TEST_CASE("wilson interval endpoints at the boundaries") {
  const auto lo = spectra::binomial_ci(0, 100, 0.68);
  CHECK(lo.low == 0.0);
  CHECK(lo.high > 0.0);
  CHECK(lo.high < 0.05);
  const auto hi = spectra::binomial_ci(100, 100, 0.68);
  CHECK(hi.high == 1.0);
  CHECK(hi.low > 0.95);
  CHECK_THROWS_AS(spectra::binomial_ci(-1, 10), std::invalid_argument);
  CHECK_THROWS_AS(spectra::binomial_ci(11, 10), std::invalid_argument);
  CHECK_THROWS_AS(spectra::binomial_ci(5, 10, 1.0), std::invalid_argument);
}

TEST_CASE("noiseless spectrum round trips through the fit") {
  const auto truth = truth_fit();
  const auto det = grid(-600e3, 600e3, 5e3);
  rng::Stream rs(1);
  const auto spec = spectra::synthesize_spectrum(truth, det, 0, rs);

  const auto fit = spectra::fit_sidebands(spec, perturb(truth));
  CHECK(fit.converged);
  CHECK(fit.residual < 1e-5);
  CHECK(fit.baseline == doctest::Approx(truth.baseline).epsilon(0.01).scale(1.0));

  double worst = 0.0;
  for (double d : det) worst = std::max(worst, std::abs(fit.eval(d) - truth.eval(d)));
  CHECK(worst < 5e-3);

  // every true sideband is recovered by the nearest fitted peak
  for (const auto& arr : {std::pair{&truth.cooling, &fit.cooling},
                          std::pair{&truth.heating, &fit.heating}}) {
    for (const auto& want : *arr.first) {
      double best_d = 1e300;
      optim::LorentzianPeak got{};
      for (const auto& p : *arr.second) {
        if (std::abs(p.center - want.center) < best_d) {
          best_d = std::abs(p.center - want.center);
          got = p;
        }
      }
      CHECK(got.center == doctest::Approx(want.center).epsilon(0.01));
      CHECK(got.amplitude == doctest::Approx(want.amplitude).epsilon(0.05));
      CHECK(got.fwhm == doctest::Approx(want.fwhm).epsilon(0.10));
    }
  }
  // the carrier constraint keeps its center within one linewidth of zero
  CHECK(std::abs(fit.carrier.center) <= fit.carrier.fwhm * 1.01 + 1.0);
}

TEST_CASE("flat spectrum fits to its baseline") {
  const auto det = grid(-500e3, 500e3, 10e3);
  std::vector<double> prob(det.size(), 0.12);
  const auto spec = spectra::RamanSpectrum::make(det, prob, 0);

  spectra::SidebandFit init{};
  init.cooling = {{{350e3, 30e3, 0.05}, {255e3, 30e3, 0.05}, {180e3, 30e3, 0.05}}};
  init.heating = {{{-350e3, 30e3, 0.05}, {-255e3, 30e3, 0.05}, {-180e3, 30e3, 0.05}}};
  init.carrier = {0.0, 40e3, 0.05};
  init.baseline = 0.10;

  const auto fit = spectra::fit_sidebands(spec, init);
  CHECK(fit.residual < 1e-6);
  for (double d : det) CHECK(std::abs(fit.eval(d) - 0.12) < 5e-3);
  CHECK(fit.baseline >= 0.0);
  CHECK(fit.baseline <= 1.0);
}

TEST_CASE("fit residual never exceeds the initial guess residual") {
  const auto truth = truth_fit();
  const auto det = grid(-550e3, 550e3, 4e3);
  rng::Stream rs(88);
  const auto spec = spectra::synthesize_spectrum(truth, det, 100, rs);

  const auto init = perturb(truth);
  const double sse0 = sse_against(init, spec);
  const auto fit = spectra::fit_sidebands(spec, init);
  CHECK(fit.residual <= sse0 * (1.0 + 1e-9));
  CHECK(fit.residual < sse0);  // noisy data, but the start is clearly off
}

TEST_CASE("fit rejects undersized spectra") {
  const auto det = grid(0.0, 90e3, 10e3);  // 10 points
  std::vector<double> prob(det.size(), 0.2);
  const auto spec = spectra::RamanSpectrum::make(det, prob, 0);
  CHECK_THROWS_AS(spectra::fit_sidebands(spec, truth_fit()), std::invalid_argument);
}

TEST_CASE("thermometry applies the thermal sideband relations") {
  spectra::SidebandFit fit{};
  const double r = 0.17 / 1.17;  // nbar = 0.17
  fit.cooling = {{{350e3, 30e3, 0.35 * r}, {255e3, 30e3, 0.35 * r}, {180e3, 30e3, 0.35 * r}}};
  fit.heating = {{{-350e3, 30e3, 0.35}, {-255e3, 30e3, 0.35}, {-180e3, 30e3, 0.35}}};
  fit.carrier = {0.0, 40e3, 0.5};

  const std::array<double, 3> nu = {two_pi * 350e3, two_pi * 255e3, two_pi * 180e3};
  const auto th = spectra::thermometry(fit, nu);
  CHECK_FALSE(th.infinite_temperature);
  for (int i = 0; i < 3; ++i) {
    CHECK(th.sideband_ratio[i] == doctest::Approx(r).epsilon(1e-12));
    CHECK(th.nbar_per_axis[i] == doctest::Approx(0.17).epsilon(1e-9));
    CHECK(th.ground_fraction_per_axis[i] == doctest::Approx(1.0 / 1.17).epsilon(1e-9));
  }
  CHECK(th.mean_ground_fraction() == doctest::Approx(1.0 / 1.17).epsilon(1e-9));
  // Bose relation at nbar = 0.17 and nu = 2 pi 350 kHz
  CHECK(th.temperature_per_axis[0] == doctest::Approx(8.707e-6).epsilon(1e-3));
}

TEST_CASE("thermometry pairs by center rank and reports per input axis") {
  spectra::SidebandFit fit{};
  // storage order deliberately scrambled; pairs are (350k, r=0.2),
  // (255k, r=0.3), (180k, r=0.4)
  fit.cooling = {{{255e3, 30e3, 0.12}, {180e3, 30e3, 0.12}, {350e3, 30e3, 0.10}}};
  fit.heating = {{{-350e3, 30e3, 0.50}, {-255e3, 30e3, 0.40}, {-180e3, 30e3, 0.30}}};
  fit.carrier = {0.0, 40e3, 0.5};

  const std::array<double, 3> nu = {two_pi * 350e3, two_pi * 180e3, two_pi * 255e3};
  const auto th = spectra::thermometry(fit, nu);
  CHECK(th.nbar_per_axis[0] == doctest::Approx(0.2 / 0.8).epsilon(1e-12));
  CHECK(th.nbar_per_axis[1] == doctest::Approx(0.4 / 0.6).epsilon(1e-12));
  CHECK(th.nbar_per_axis[2] == doctest::Approx(0.3 / 0.7).epsilon(1e-12));
  CHECK(th.temperature_per_axis[0] == doctest::Approx(1.04359e-5).epsilon(1e-4));
}

TEST_CASE("thermometry edge cases") {
  spectra::SidebandFit fit{};
  fit.cooling = {{{350e3, 30e3, 0.0}, {255e3, 30e3, 0.1}, {180e3, 30e3, 0.1}}};
  fit.heating = {{{-350e3, 30e3, 0.3}, {-255e3, 30e3, 0.3}, {-180e3, 30e3, 0.3}}};
  const std::array<double, 3> nu = {two_pi * 350e3, two_pi * 255e3, two_pi * 180e3};

  SUBCASE("zero ratio is the ground state") {
    const auto th = spectra::thermometry(fit, nu);
    CHECK(th.nbar_per_axis[0] == 0.0);
    CHECK(th.ground_fraction_per_axis[0] == 1.0);
    CHECK(th.temperature_per_axis[0] == 0.0);
  }
  SUBCASE("ratio at or above one flags infinite temperature") {
    fit.cooling[1].amplitude = 0.3;
    const auto th = spectra::thermometry(fit, nu);
    CHECK(th.infinite_temperature);
    CHECK(std::isinf(th.nbar_per_axis[1]));
    CHECK(th.ground_fraction_per_axis[1] == 0.0);
    CHECK(std::isinf(th.temperature_per_axis[1]));
    // the other axes are still reported
    CHECK(th.ground_fraction_per_axis[0] == 1.0);
  }
  SUBCASE("nonpositive heating amplitude is rejected") {
    fit.heating[2].amplitude = 0.0;
    CHECK_THROWS_AS(spectra::thermometry(fit, nu), std::invalid_argument);
  }
  SUBCASE("unpairable centers are rejected") {
    fit.heating[1].amplitude = 0.3;
    fit.heating[1].center = -100e3;  // no cooling partner within 10%
    CHECK_THROWS_AS(spectra::thermometry(fit, nu), std::runtime_error);
  }
}

TEST_CASE("noisy thermometry round trip recovers the occupations") {
  const std::array<double, 3> nbar_true = {0.05, 0.17, 0.5};
  spectra::SidebandFit truth{};
  const std::array<double, 3> centers = {350e3, 255e3, 180e3};
  const std::array<double, 3> heat_amp = {0.5, 0.5, 0.5};
  for (int i = 0; i < 3; ++i) {
    const double r = nbar_true[i] / (1.0 + nbar_true[i]);
    truth.cooling[i] = {centers[i], 30e3, heat_amp[i] * r};
    truth.heating[i] = {-centers[i], 30e3, heat_amp[i]};
  }
  truth.carrier = {0.0, 35e3, 0.45};
  truth.baseline = 0.06;

  const auto det = grid(-550e3, 550e3, 3e3);
  rng::Stream rs(4242);
  const auto spec = spectra::synthesize_spectrum(truth, det, 400, rs);
  const auto fit = spectra::fit_sidebands(spec, perturb(truth));

  const std::array<double, 3> nu = {two_pi * 350e3, two_pi * 255e3, two_pi * 180e3};
  const auto th = spectra::thermometry(fit, nu);
  CHECK_FALSE(th.infinite_temperature);
  CHECK(std::abs(th.nbar_per_axis[0] - 0.05) < 0.06);
  CHECK(std::abs(th.nbar_per_axis[1] - 0.17) < 0.06);
  CHECK(std::abs(th.nbar_per_axis[2] - 0.5) < 0.12);
}

TEST_CASE("synthesized spectra are deterministic quantized draws") {
  const auto truth = truth_fit();
  const auto det = grid(-400e3, 400e3, 20e3);

  rng::Stream a(5), b(5), c(6);
  const auto s1 = spectra::synthesize_spectrum(truth, det, 50, a);
  const auto s2 = spectra::synthesize_spectrum(truth, det, 50, b);
  const auto s3 = spectra::synthesize_spectrum(truth, det, 50, c);
  CHECK(s1.transfer_probability == s2.transfer_probability);
  CHECK(s1.transfer_probability != s3.transfer_probability);
  CHECK(s1.trials_per_point == 50);

  for (double p : s1.transfer_probability) {
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    CHECK(std::abs(p * 50 - std::round(p * 50)) < 1e-9);
  }

  rng::Stream d(7);
  const auto clean = spectra::synthesize_spectrum(truth, det, 0, d);
  for (std::size_t i = 0; i < det.size(); ++i)
    CHECK(clean.transfer_probability[i] ==
          std::clamp(truth.eval(det[i]), 0.0, 1.0));
}

TEST_CASE("spectrum csv round trip and validation") {
  const std::string path = "test_spectra_tmp.csv";
  const auto det = grid(-100e3, 100e3, 25e3);
  std::vector<double> prob = {0.1, 0.3, 1.0 / 3.0, 0.5, 0.05, 0.9, 0.0, 1.0, 0.25};
  REQUIRE(prob.size() == det.size());
  const auto spec = spectra::RamanSpectrum::make(det, prob, 120);
  spec.save_csv(path);
  const auto back = spectra::RamanSpectrum::load_csv(path);
  CHECK(back.detuning == spec.detuning);
  CHECK(back.transfer_probability == spec.transfer_probability);
  CHECK(back.trials_per_point == 120);
  std::remove(path.c_str());

  CHECK_THROWS_AS(spectra::RamanSpectrum::make({0.0, 1.0, 1.0}, {0.1, 0.1, 0.1}, 10),
                  std::invalid_argument);
  CHECK_THROWS_AS(spectra::RamanSpectrum::make({0.0, 1.0}, {0.1, 1.5}, 10),
                  std::invalid_argument);
  CHECK_THROWS_AS(spectra::RamanSpectrum::make({}, {}, 10), std::invalid_argument);
  try {
    spectra::RamanSpectrum::make({0.0, 1.0, 0.5}, {0.1, 0.1, 0.1}, 10);
    FAIL("expected a throw");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
  }
}

TEST_CASE("spectrum csv rejects inconsistent trial counts") {
  const std::string path = "test_spectra_bad_tmp.csv";
  {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    REQUIRE(fp != nullptr);
    std::fputs("detuning_hz,transfer_probability,trials\n", fp);
    std::fputs("-1000,0.25,100\n", fp);
    std::fputs("0,0.5,100\n", fp);
    std::fputs("1000,0.75,90\n", fp);
    std::fclose(fp);
  }
  try {
    spectra::RamanSpectrum::load_csv(path);
    FAIL("expected a throw");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find(path) != std::string::npos);
    CHECK(msg.find("row 3") != std::string::npos);
  }
  std::remove(path.c_str());
}
