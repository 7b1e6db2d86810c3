#include "ramankit/phys.hpp"

#include <cmath>
#include <stdexcept>

namespace ramankit::phys {

using constants::hbar;
using constants::pi;
using constants::planck_h;
using constants::two_pi;

AtomSpecies AtomSpecies::make(double mass, double gamma, double repump_wavelength) {
  if (!(mass > 0.0)) throw std::invalid_argument("AtomSpecies: mass must be positive");
  if (!(gamma > 0.0)) throw std::invalid_argument("AtomSpecies: gamma must be positive");
  if (!(repump_wavelength > 0.0))
    throw std::invalid_argument("AtomSpecies: wavelength must be positive");
  return {mass, gamma, repump_wavelength, planck_h / repump_wavelength};
}

AtomSpecies AtomSpecies::rb87() {
  return make(constants::rb87_mass, two_pi * 3.0e6, 795.0e-9);
}

LatticeParams LatticeParams::make(double period_a, double depth_U0, double chi) {
  if (!(period_a > 0.0)) throw std::invalid_argument("LatticeParams: period must be positive");
  if (!(depth_U0 > 0.0)) throw std::invalid_argument("LatticeParams: depth must be positive");
  if (!std::isfinite(chi)) throw std::invalid_argument("LatticeParams: chi must be finite");
  return {period_a, depth_U0, chi};
}

double lattice_potential_ground(const LatticeParams& lattice, double x) {
  const double c = std::cos(pi * x / lattice.period_a);
  return -lattice.depth_U0 * c * c;
}

double lattice_potential_ground_derivative(const LatticeParams& lattice, double x) {
  const double k = pi / lattice.period_a;
  return lattice.depth_U0 * k * std::sin(2.0 * k * x);
}

double lattice_potential_excited(const LatticeParams& lattice, double x) {
  return lattice.chi * lattice_potential_ground(lattice, x);
}

double trap_frequency_from_depth(const LatticeParams& lattice, double mass) {
  if (!(mass > 0.0)) throw std::invalid_argument("trap_frequency_from_depth: mass must be positive");
  return pi / lattice.period_a * std::sqrt(2.0 * lattice.depth_U0 / mass);
}

TrapOscillator trap_oscillator(const LatticeParams& lattice, const AtomSpecies& atom) {
  return {trap_frequency_from_depth(lattice, atom.mass), atom.mass};
}

double rabi_from_saturation(double s, double gamma) {
  if (s < 0.0) throw std::domain_error("rabi_from_saturation: saturation must be non-negative");
  return 2.0 * gamma * std::sqrt(0.5 * s);
}

double saturation_from_rabi(double omega, double gamma) {
  if (omega < 0.0) throw std::domain_error("saturation_from_rabi: Rabi frequency must be non-negative");
  const double ratio = omega / (2.0 * gamma);
  return 2.0 * ratio * ratio;
}

double detuning_at_bottom(double detuning_free_space, const LatticeParams& lattice) {
  return detuning_free_space - lattice.depth_U0 * (1.0 - lattice.chi) / hbar;
}

RepumperField RepumperField::from_saturation(double s, const AtomSpecies& atom,
                                             double detuning_free_space,
                                             const LatticeParams& lattice) {
  const double omega = rabi_from_saturation(s, atom.gamma);
  return {s, omega, detuning_free_space,
          phys::detuning_at_bottom(detuning_free_space, lattice)};
}

RepumperField RepumperField::from_rabi(double omega, const AtomSpecies& atom,
                                       double detuning_free_space,
                                       const LatticeParams& lattice) {
  const double s = saturation_from_rabi(omega, atom.gamma);
  return {s, omega, detuning_free_space,
          phys::detuning_at_bottom(detuning_free_space, lattice)};
}

}  // namespace ramankit::phys
