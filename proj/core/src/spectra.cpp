#include "ramankit/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ramankit/constants.hpp"
#include "ramankit/csv.hpp"

namespace ramankit::spectra {

using constants::boltzmann_kB;
using constants::hbar;
using constants::two_pi;

RamanSpectrum RamanSpectrum::make(std::vector<double> detuning,
                                  std::vector<double> transfer_probability,
                                  int trials_per_point) {
  if (detuning.size() != transfer_probability.size())
    throw std::invalid_argument("RamanSpectrum: column lengths differ");
  if (detuning.empty()) throw std::invalid_argument("RamanSpectrum: empty spectrum");
  if (trials_per_point < 0)
    throw std::invalid_argument("RamanSpectrum: negative trial count");
  for (std::size_t i = 0; i < detuning.size(); ++i) {
    if (!std::isfinite(detuning[i]))
      throw std::invalid_argument("RamanSpectrum: row " + std::to_string(i + 1) +
                                  ": non-finite detuning");
    if (i > 0 && !(detuning[i] > detuning[i - 1]))
      throw std::invalid_argument("RamanSpectrum: row " + std::to_string(i + 1) +
                                  ": detuning not strictly increasing");
    const double p = transfer_probability[i];
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("RamanSpectrum: row " + std::to_string(i + 1) +
                                  ": probability outside [0, 1]");
  }
  RamanSpectrum spec;
  spec.detuning = std::move(detuning);
  spec.transfer_probability = std::move(transfer_probability);
  spec.trials_per_point = trials_per_point;
  return spec;
}

RamanSpectrum RamanSpectrum::load_csv(const std::string& path) {
  const csv::Table table = csv::read_table(path);
  const std::size_t c_det = table.column("detuning_hz");
  const std::size_t c_prob = table.column("transfer_probability");
  const std::size_t c_trials = table.column("trials");
  std::vector<double> det, prob;
  int trials = 0;
  det.reserve(table.rows.size());
  prob.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    det.push_back(table.rows[i][c_det]);
    prob.push_back(table.rows[i][c_prob]);
    const double t = table.rows[i][c_trials];
    if (!(t >= 0.0) || t != std::floor(t))
      throw std::runtime_error(path + ": row " + std::to_string(i + 1) +
                               ": trials must be a non-negative integer");
    if (i == 0)
      trials = static_cast<int>(t);
    else if (static_cast<int>(t) != trials)
      throw std::runtime_error(path + ": row " + std::to_string(i + 1) +
                               ": trials differs between rows");
  }
  try {
    return make(std::move(det), std::move(prob), trials);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void RamanSpectrum::save_csv(const std::string& path) const {
  std::vector<std::vector<double>> rows;
  rows.reserve(detuning.size());
  for (std::size_t i = 0; i < detuning.size(); ++i)
    rows.push_back({detuning[i], transfer_probability[i],
                    static_cast<double>(trials_per_point)});
  csv::write_table(path, {"detuning_hz", "transfer_probability", "trials"}, rows);
}

std::array<optim::LorentzianPeak, 7> SidebandFit::all_peaks() const {
  return {cooling[0], cooling[1], cooling[2], heating[0],
          heating[1], heating[2], carrier};
}

double SidebandFit::eval(double detuning_hz) const {
  const std::array<optim::LorentzianPeak, 7> peaks = all_peaks();
  return optim::multi_lorentzian_eval(peaks, baseline, detuning_hz);
}

namespace {

constexpr int kParams = 22;  // 7 peaks x (center, fwhm, amplitude) + baseline

SidebandFit unpack(std::span<const double> v) {
  auto peak = [&](int base) {
    return optim::LorentzianPeak{v[base], std::abs(v[base + 1]), std::abs(v[base + 2])};
  };
  SidebandFit f;
  for (int k = 0; k < 3; ++k) f.cooling[k] = peak(3 * k);
  for (int k = 0; k < 3; ++k) f.heating[k] = peak(9 + 3 * k);
  f.carrier = peak(18);
  f.baseline = v[21];
  return f;
}

void pack(const SidebandFit& f, std::vector<double>& v) {
  v.resize(kParams);
  auto put = [&](int base, const optim::LorentzianPeak& p) {
    v[base] = p.center;
    v[base + 1] = p.fwhm;
    v[base + 2] = p.amplitude;
  };
  for (int k = 0; k < 3; ++k) put(3 * k, f.cooling[k]);
  for (int k = 0; k < 3; ++k) put(9 + 3 * k, f.heating[k]);
  put(18, f.carrier);
  v[21] = f.baseline;
}

double sum_squared_residuals(const RamanSpectrum& spec, const SidebandFit& f) {
  const std::array<optim::LorentzianPeak, 7> peaks = f.all_peaks();
  double s = 0.0;
  for (std::size_t i = 0; i < spec.detuning.size(); ++i) {
    const double r = optim::multi_lorentzian_eval(peaks, f.baseline, spec.detuning[i]) -
                     spec.transfer_probability[i];
    s += r * r;
  }
  return s;
}

}  // namespace

SidebandFit fit_sidebands(const RamanSpectrum& spec, const SidebandFit& init,
                          const SidebandFitOptions& opts) {
  const std::size_t n = spec.detuning.size();
  if (n < 15)
    throw std::invalid_argument("fit_sidebands: need at least 15 data points");

  const double span = spec.detuning.back() - spec.detuning.front();
  const double y_max = *std::max_element(spec.transfer_probability.begin(),
                                         spec.transfer_probability.end());
  const double pen_scale = 10.0 * static_cast<double>(n);

  const auto objective = [&](std::span<const double> v) {
    const SidebandFit f = unpack(v);
    double obj = sum_squared_residuals(spec, f);
    // soft constraints: carrier center inside one carrier linewidth of zero,
    // baseline inside [0, 1]
    const double carrier_excess =
        std::max(0.0, std::abs(f.carrier.center) - f.carrier.fwhm);
    const double carrier_norm = f.carrier.fwhm + 1e-6 * span + 1e-300;
    obj += pen_scale * (carrier_excess / carrier_norm) * (carrier_excess / carrier_norm);
    const double base_excess =
        std::max(0.0, f.baseline - 1.0) + std::max(0.0, -f.baseline);
    obj += pen_scale * base_excess * base_excess;
    return obj;
  };

  std::vector<double> x0;
  pack(init, x0);
  std::vector<double> scale(kParams);
  for (int base : {0, 3, 6, 9, 12, 15, 18}) {
    const double w = std::max(std::abs(x0[base + 1]), 1e-4 * span);
    scale[base] = 0.25 * w;
    scale[base + 1] = 0.25 * w;
    scale[base + 2] = 0.25 * std::abs(x0[base + 2]) + 0.02 * (y_max + 1e-6);
  }
  scale[21] = 0.02;

  const optim::FitResult fr = optim::nelder_mead_multistart(
      objective, x0, scale, opts.n_starts, opts.seed, opts.nm);

  SidebandFit out = unpack(fr.params);
  out.baseline = std::clamp(out.baseline, 0.0, 1.0);
  out.residual = sum_squared_residuals(spec, out);
  out.converged = fr.converged;
  return out;
}

double ThermometryResult::mean_ground_fraction() const {
  return (ground_fraction_per_axis[0] + ground_fraction_per_axis[1] +
          ground_fraction_per_axis[2]) /
         3.0;
}

ThermometryResult thermometry(const SidebandFit& fit,
                              const std::array<double, 3>& nu_per_axis) {
  std::array<int, 3> cool_order{0, 1, 2}, heat_order{0, 1, 2}, axis_order{0, 1, 2};
  std::sort(cool_order.begin(), cool_order.end(), [&](int a, int b) {
    return std::abs(fit.cooling[a].center) < std::abs(fit.cooling[b].center);
  });
  std::sort(heat_order.begin(), heat_order.end(), [&](int a, int b) {
    return std::abs(fit.heating[a].center) < std::abs(fit.heating[b].center);
  });
  std::sort(axis_order.begin(), axis_order.end(),
            [&](int a, int b) { return nu_per_axis[a] < nu_per_axis[b]; });

  ThermometryResult out{};
  for (int rank = 0; rank < 3; ++rank) {
    const optim::LorentzianPeak& cool = fit.cooling[cool_order[rank]];
    const optim::LorentzianPeak& heat = fit.heating[heat_order[rank]];
    const double cc = std::abs(cool.center);
    const double hc = std::abs(heat.center);
    if (std::abs(cc - hc) > 0.1 * std::max(cc, hc))
      throw std::runtime_error(
          "thermometry: cooling/heating sideband centers do not pair within 10%");
    if (!(heat.amplitude > 0.0))
      throw std::invalid_argument("thermometry: heating amplitude must be positive");

    const int axis = axis_order[rank];
    const double r = cool.amplitude / heat.amplitude;
    out.sideband_ratio[axis] = r;
    if (r >= 1.0) {
      out.infinite_temperature = true;
      out.nbar_per_axis[axis] = std::numeric_limits<double>::infinity();
      out.ground_fraction_per_axis[axis] = 0.0;
      out.temperature_per_axis[axis] = std::numeric_limits<double>::infinity();
      continue;
    }
    const double nbar = r / (1.0 - r);
    out.nbar_per_axis[axis] = nbar;
    out.ground_fraction_per_axis[axis] = 1.0 / (1.0 + nbar);
    // Bose relation; nbar = 0 gives T = 0 through the log1p(inf) limit
    out.temperature_per_axis[axis] =
        hbar * nu_per_axis[axis] / (boltzmann_kB * std::log1p(1.0 / nbar));
  }
  return out;
}

namespace {

// inverse standard normal CDF: Acklam's rational approximation polished with
// one Halley step against erfc, good to full double precision on (0, 1)
double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("inverse_normal_cdf: p must be in (0, 1)");
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double err = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = err * std::sqrt(two_pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

}  // namespace

Interval binomial_ci(int successes, int trials, double level) {
  if (trials <= 0 || successes < 0 || successes > trials)
    throw std::invalid_argument("binomial_ci: need 0 <= successes <= trials, trials > 0");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("binomial_ci: level must be in (0, 1)");
  const double z = inverse_normal_cdf(0.5 + 0.5 * level);
  const double n = trials;
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

RamanSpectrum synthesize_spectrum(const SidebandFit& truth,
                                  const std::vector<double>& detuning_hz,
                                  int trials_per_point, rng::Stream& stream) {
  std::vector<double> prob(detuning_hz.size());
  for (std::size_t i = 0; i < detuning_hz.size(); ++i) {
    const double p = std::clamp(truth.eval(detuning_hz[i]), 0.0, 1.0);
    if (trials_per_point == 0) {
      prob[i] = p;
      continue;
    }
    int hits = 0;
    for (int t = 0; t < trials_per_point; ++t) hits += stream.bernoulli(p) ? 1 : 0;
    prob[i] = static_cast<double>(hits) / trials_per_point;
  }
  return RamanSpectrum::make(std::vector<double>(detuning_hz), std::move(prob),
                             trials_per_point);
}

}  // namespace ramankit::spectra
