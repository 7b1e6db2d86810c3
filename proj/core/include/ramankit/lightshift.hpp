#pragma once

#include "ramankit/phys.hpp"

// Light shift of the repump transition for trapped atoms, in three levels of
// refinement: the dressed two-level atom (exact and first order in s), the
// three-level steady state including the Raman coupling, and the time average
// over the atom's oscillation in the well.

namespace ramankit::lightshift {

struct TwoLevelModel {
  double gamma;         // rad/s, half linewidth
  double saturation_s;  // s = 2 (Omega / 2 gamma)^2
};

// First order dispersive shift (s/2) gamma^2 delta / (delta^2 + gamma^2).
double shift_linear(const TwoLevelModel& model, double delta);

// Real part of the dressed ground state eigenvalue,
//   (1/2) Re[-delta - i gamma + sqrt((2s-1) gamma^2 + delta^2 + 2 i gamma delta)],
// with the square root branch that connects to the bare ground state as s -> 0.
double shift_exact(const TwoLevelModel& model, double delta);

struct ThreeLevelModel {
  double repump_rabi;        // Omega, rad/s
  double raman_rabi;         // Omega-tilde, rad/s
  double linewidth;          // Gamma = 2 (gamma_1 + gamma_2), rad/s
  double repump_efficiency;  // alpha = gamma_2 / (gamma_1 + gamma_2)

  static ThreeLevelModel from_saturation(double s, double gamma, double raman_rabi,
                                         double repump_efficiency = 0.5);

  // The steady state expressions assume Gamma >> Omega >> Omega-tilde.
  bool in_validity_regime() const;
};

// Excited state population in steady state as a function of the repump
// detuning delta and the Raman detuning delta_prime.
double rho_ee_steady(const ThreeLevelModel& model, double delta, double delta_prime);

// Raman detuning that maximizes rho_ee at fixed repump detuning, i.e. the
// light shift of the Raman line. Stationary points of rho_ee solve
//   dp^3 - (3/2) delta dp^2 + (delta^2/2 - Omega^2/4 + Gamma^2/8) dp
//        + delta Omega^2 / 8 = 0,
// solved in closed form and polished by Newton steps; among the real roots
// the one with the largest rho_ee is returned.
double optimal_delta_prime(const ThreeLevelModel& model, double delta);

// Detuning at displacement x from the well bottom in the harmonic expansion:
// delta(x) = delta + m nu^2 x^2 (1 - chi) / (2 hbar).
double position_detuning(double x, double delta, const phys::TrapOscillator& trap,
                         const phys::LatticeParams& lattice);

struct OscillatingAtom {
  double kinetic_energy;  // J, energy of the oscillation
  phys::TrapOscillator trap;
  phys::LatticeParams lattice;
};

// Closed form average of the first-order shift over one oscillation period,
//   (s gamma^2 / 2) Re[ ((delta - i gamma)(delta - i gamma + xi))^(-1/2) ],
// with xi = E_k (1 - chi) / hbar. Factor-wise principal square roots select
// the branch that reduces to shift_linear at E_k = 0.
double oscillation_averaged_shift(const TwoLevelModel& model, double delta,
                                  const OscillatingAtom& atom);

enum class ShiftModel { linear, exact };

// Independent check of the closed form: midpoint-rule time average of the
// instantaneous shift at delta(x(t)) over one period.
double oscillation_averaged_shift_quadrature(const TwoLevelModel& model, double delta,
                                             const OscillatingAtom& atom,
                                             int n_steps = 10000,
                                             ShiftModel shift = ShiftModel::linear);

}  // namespace ramankit::lightshift
