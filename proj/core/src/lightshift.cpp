#include "ramankit/lightshift.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace ramankit::lightshift {

using constants::hbar;
using constants::two_pi;

double shift_linear(const TwoLevelModel& model, double delta) {
  const double g2 = model.gamma * model.gamma;
  return 0.5 * g2 * delta / (delta * delta + g2) * model.saturation_s;
}

double shift_exact(const TwoLevelModel& model, double delta) {
  const double g = model.gamma;
  const std::complex<double> radicand(
      (2.0 * model.saturation_s - 1.0) * g * g + delta * delta, 2.0 * g * delta);
  std::complex<double> root = std::sqrt(radicand);
  // The principal branch follows the ground state eigenvalue only for
  // delta >= 0; for delta < 0 it jumps to the excited branch (visible as a
  // discontinuity along a delta sweep), so flip the sign there. At s = 0 the
  // root is then +(delta + i gamma) for every delta and the shift vanishes.
  if (delta < 0.0) root = -root;
  return 0.5 * (-delta + root.real());
}

ThreeLevelModel ThreeLevelModel::from_saturation(double s, double gamma, double raman_rabi,
                                                 double repump_efficiency) {
  if (!(gamma > 0.0)) throw std::invalid_argument("ThreeLevelModel: gamma must be positive");
  if (repump_efficiency <= 0.0 || repump_efficiency > 1.0)
    throw std::invalid_argument("ThreeLevelModel: repump efficiency must be in (0, 1]");
  return {phys::rabi_from_saturation(s, gamma), raman_rabi, 2.0 * gamma, repump_efficiency};
}

bool ThreeLevelModel::in_validity_regime() const {
  return linewidth > 3.0 * repump_rabi && repump_rabi > 3.0 * raman_rabi;
}

double rho_ee_steady(const ThreeLevelModel& model, double delta, double delta_prime) {
  const double o2 = model.repump_rabi * model.repump_rabi;
  const double ot2 = model.raman_rabi * model.raman_rabi;
  const double G2 = model.linewidth * model.linewidth;
  const double a = model.repump_efficiency;
  const double delta_rel = delta - delta_prime;
  const double cross = o2 + 4.0 * delta_prime * delta_rel;
  const double denom = 2.0 * ot2 * (G2 + 4.0 * delta * delta) +
                       4.0 * a * delta_prime * delta_prime * G2 + a * cross * cross;
  return o2 * ot2 / denom;
}

namespace {

// Real roots of y^3 + b y^2 + c y + d = 0.
std::vector<double> cubic_real_roots(double b, double c, double d) {
  const double p = c - b * b / 3.0;
  const double q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
  const double shift = -b / 3.0;
  std::vector<double> roots;
  const double disc = 0.25 * q * q + p * p * p / 27.0;
  if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    const double z = std::cbrt(-0.5 * q + sq) + std::cbrt(-0.5 * q - sq);
    roots.push_back(z + shift);
  } else if (p < 0.0) {
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    const double phi = std::acos(arg);
    for (int k = 0; k < 3; ++k)
      roots.push_back(m * std::cos(phi / 3.0 - two_pi * k / 3.0) + shift);
  } else {
    // p == 0 and disc <= 0 imply q == 0: triple root
    roots.push_back(shift);
  }

  auto f = [&](double y) { return ((y + b) * y + c) * y + d; };
  auto fp = [&](double y) { return (3.0 * y + 2.0 * b) * y + c; };
  for (double& y : roots) {
    for (int it = 0; it < 8; ++it) {
      const double deriv = fp(y);
      if (deriv == 0.0) break;
      const double step = f(y) / deriv;
      y -= step;
      if (std::abs(step) < 1e-16 * (1.0 + std::abs(y))) break;
    }
  }
  return roots;
}

}  // namespace

double optimal_delta_prime(const ThreeLevelModel& model, double delta) {
  if (!(model.linewidth > 0.0))
    throw std::invalid_argument("optimal_delta_prime: linewidth must be positive");
  if (model.repump_rabi == 0.0) return 0.0;  // no light, no shift

  // Work in units of Gamma for conditioning.
  const double D = delta / model.linewidth;
  const double W = model.repump_rabi / model.linewidth;
  const double b = -1.5 * D;
  const double c = 0.5 * D * D - 0.25 * W * W + 0.125;
  const double d = 0.125 * D * W * W;

  const std::vector<double> roots = cubic_real_roots(b, c, d);
  double best = roots.front() * model.linewidth;
  double best_rho = rho_ee_steady(model, delta, best);
  for (std::size_t i = 1; i < roots.size(); ++i) {
    const double candidate = roots[i] * model.linewidth;
    const double rho = rho_ee_steady(model, delta, candidate);
    if (rho > best_rho || (rho == best_rho && candidate < best)) {
      best = candidate;
      best_rho = rho;
    }
  }
  return best;
}

double position_detuning(double x, double delta, const phys::TrapOscillator& trap,
                         const phys::LatticeParams& lattice) {
  return delta +
         trap.mass * trap.nu * trap.nu * x * x * (1.0 - lattice.chi) / (2.0 * hbar);
}

double oscillation_averaged_shift(const TwoLevelModel& model, double delta,
                                  const OscillatingAtom& atom) {
  if (atom.kinetic_energy < 0.0)
    throw std::invalid_argument("oscillation_averaged_shift: kinetic energy must be >= 0");
  const double xi = atom.kinetic_energy * (1.0 - atom.lattice.chi) / hbar;
  const std::complex<double> a(delta, -model.gamma);
  const std::complex<double> inv_root = 1.0 / (std::sqrt(a) * std::sqrt(a + xi));
  return 0.5 * model.gamma * model.gamma * model.saturation_s * inv_root.real();
}

double oscillation_averaged_shift_quadrature(const TwoLevelModel& model, double delta,
                                             const OscillatingAtom& atom, int n_steps,
                                             ShiftModel shift) {
  if (n_steps < 1) throw std::invalid_argument("quadrature: n_steps must be >= 1");
  const double nu = atom.trap.nu;
  const double amplitude =
      std::sqrt(2.0 * atom.kinetic_energy / (atom.trap.mass * nu * nu));
  double acc = 0.0;
  for (int j = 0; j < n_steps; ++j) {
    const double t = (j + 0.5) / n_steps * two_pi / nu;
    const double x = amplitude * std::sin(nu * t);
    const double dx = position_detuning(x, delta, atom.trap, atom.lattice);
    acc += shift == ShiftModel::linear ? shift_linear(model, dx) : shift_exact(model, dx);
  }
  return acc / n_steps;
}

}  // namespace ramankit::lightshift
