#pragma once

#include "ramankit/constants.hpp"

// Shared parameter types for a single atom in a one dimensional optical
// lattice addressed by a near-resonant repumping field.
//
// Unit conventions, used throughout the library:
//   - angular frequencies and detunings in rad/s
//   - gamma is the HALF linewidth of the optical transition (the full
//     linewidth is Gamma = 2*gamma)
//   - energies in J, lengths in m, momenta in kg m/s
// File and command line interfaces convert to Hz / microkelvin / nm at the
// boundary; nothing inside the library does.

namespace ramankit::phys {

struct AtomSpecies {
  double mass;               // kg
  double gamma;              // rad/s, half linewidth of the repump transition
  double repump_wavelength;  // m
  double recoil_momentum;    // kg m/s, h / wavelength

  static AtomSpecies make(double mass, double gamma, double repump_wavelength);

  // 87Rb addressed on the D1 line (795 nm), gamma = 2*pi*3 MHz
  static AtomSpecies rb87();
};

struct LatticeParams {
  double period_a;   // m, half the lattice laser wavelength
  double depth_U0;   // J, full depth of the ground state potential, > 0
  double chi;        // ratio of excited to ground state polarizability

  static LatticeParams make(double period_a, double depth_U0, double chi);
};

// Ground state lattice potential U_g(x) = -U0 cos^2(pi x / a), minimum at
// x = 0, and the excited state potential chi * U_g(x).
double lattice_potential_ground(const LatticeParams& lattice, double x);
double lattice_potential_ground_derivative(const LatticeParams& lattice, double x);
double lattice_potential_excited(const LatticeParams& lattice, double x);

struct TrapOscillator {
  double nu;    // rad/s, harmonic frequency at the well bottom
  double mass;  // kg
};

// Harmonic expansion of the well bottom: nu = (pi/a) sqrt(2 U0 / m).
double trap_frequency_from_depth(const LatticeParams& lattice, double mass);

TrapOscillator trap_oscillator(const LatticeParams& lattice, const AtomSpecies& atom);

// Saturation convention s = 2 (Omega / 2 gamma)^2, i.e. Omega = 2 gamma sqrt(s/2).
double rabi_from_saturation(double s, double gamma);
double saturation_from_rabi(double omega, double gamma);

// Detuning seen at the bottom of the well. The lattice raises the transition
// frequency by U0 (1 - chi) / hbar, so a field at free-space detuning
// delta_tilde is at delta = delta_tilde - U0 (1 - chi) / hbar on the trapped atom.
double detuning_at_bottom(double detuning_free_space, const LatticeParams& lattice);

struct RepumperField {
  double saturation_s;
  double rabi_omega;            // rad/s
  double detuning_free_space;   // rad/s, relative to the free atom
  double detuning_at_bottom;    // rad/s, relative to the trapped atom at x = 0

  static RepumperField from_saturation(double s, const AtomSpecies& atom,
                                       double detuning_free_space,
                                       const LatticeParams& lattice);
  static RepumperField from_rabi(double omega, const AtomSpecies& atom,
                                 double detuning_free_space,
                                 const LatticeParams& lattice);
};

}  // namespace ramankit::phys
