#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ramankit/phys.hpp"
#include "ramankit/rng.hpp"

// Semi-classical Monte Carlo of a single atom moving in the dressed
// potentials formed by the lattice and the repumping field. Photon
// scattering events are drawn by thinning an inhomogeneous Poisson process;
// each event deposits a recoil kick and may switch the dressed branch, which
// is the microscopic origin of the dipole force fluctuation heating studied
// with run_ensemble and sweep_map.

namespace ramankit::mc {

enum class Branch : int { minus = 0, plus = 1 };

struct DressedField {
  phys::LatticeParams lattice;
  phys::RepumperField repumper;
  phys::AtomSpecies atom;

  static DressedField make(const phys::LatticeParams& lattice,
                           const phys::RepumperField& repumper,
                           const phys::AtomSpecies& atom);

  // Local detuning delta(x) = delta_tilde + (U_g(x) - U_e(x)) / hbar.
  double detuning_at(double x) const;

  // theta(x) in (0, pi/2): theta -> 0 for delta -> -inf, pi/4 at resonance,
  // pi/2 for delta -> +inf.
  double mixing_angle(double x) const;

  struct Potentials {
    double minus, plus;
  };
  // U_pm(x) = U_g(x) + (hbar/2) (-delta(x) +- sqrt(delta(x)^2 + Omega^2)).
  Potentials dressed_potentials(double x) const;
  double potential(double x, Branch branch) const;

  // -dU_pm/dx, analytic.
  double dressed_force(double x, Branch branch) const;

  struct AllRates {
    double stay_minus;         // Gamma sin^2 cos^2
    double change_from_minus;  // Gamma sin^4
    double stay_plus;          // Gamma sin^2 cos^2
    double change_from_plus;   // Gamma cos^4
  };
  // The four add up to Gamma = 2 gamma.
  AllRates transition_rates(double x) const;

  struct ChannelRates {
    double stay, change;
  };
  ChannelRates rates_in_branch(double x, Branch branch) const;

  double linewidth() const { return 2.0 * atom.gamma; }
};

struct AtomTrajectoryState {
  double x = 0.0;  // m
  double p = 0.0;  // kg m/s
  Branch branch = Branch::minus;
  double t = 0.0;  // s
  long photons = 0;
  bool alive = true;
};

struct MCConfig {
  double dt_max = 0.0;            // s, integrator cap, <= 1 / (50 nu)
  double t_max = 20e-3;           // s
  double boundary_x = 0.0;        // m, <= a/2; crossing it counts as loss
  int ensemble_n = 500;
  std::uint64_t seed = 1;
  double init_temperature = 100e-6;  // K
  int time_bins = 64;                // resolution of the aggregated curves
  bool double_recoil = false;        // model absorption + emission as two kicks

  // dt_max = 1/(50 nu) and boundary_x = a/2 for the given field.
  static MCConfig defaults_for(const DressedField& field);

  void validate(const DressedField& field) const;
};

// Thermal initial conditions: energy from a 1D Boltzmann distribution
// truncated at 0.95 U0, released at the well bottom and propagated in the
// bare lattice potential for a uniform fraction of a trap period, then
// projected onto a dressed branch with P(minus) = cos^2 theta(x).
AtomTrajectoryState init_atom(const MCConfig& cfg, const DressedField& field,
                              rng::Stream& stream);

Branch sample_initial_branch(const DressedField& field, double x, rng::Stream& stream);

// Velocity-Verlet propagation in the active branch potential for exactly
// `duration`, subdivided so no substep exceeds dt_max. Sets alive = false
// (and stops) as soon as |x| exceeds boundary_x.
void step_motion(AtomTrajectoryState& state, const DressedField& field, double duration,
                 double dt_max, double boundary_x);

// Upper bounds (with a 1.05 safety margin) of the stay/change rates over the
// positions reachable at the current mechanical energy, used as the thinning
// majorant.
DressedField::ChannelRates channel_rate_maxima(const AtomTrajectoryState& state,
                                               const DressedField& field,
                                               double boundary_x);

struct EventDraw {
  double elapsed = 0.0;        // time advanced inside the call
  bool change_channel = false; // valid when occurred
  bool occurred = false;       // false when t_max was reached or the atom left
};

// Draws the next scattering event by thinning: candidate waiting times are
// the minimum of one exponential per channel at its rate maximum, the atom
// is propagated to the candidate time and the event is accepted with
// probability R(x_new) / R_max. Rejections redraw from the same maxima (the
// mechanical energy is unchanged between events). The state's clock and
// phase space coordinates advance; the event itself is not applied.
EventDraw sample_event(AtomTrajectoryState& state, const DressedField& field,
                       const MCConfig& cfg, rng::Stream& stream);

// Applies a scattering event: increments the photon counter, flips the
// branch for change events and adds hbar k to p with a random sign (twice
// when cfg.double_recoil is set).
void apply_scatter(AtomTrajectoryState& state, const DressedField& field,
                   const MCConfig& cfg, bool change_channel, rng::Stream& stream);

struct AtomRunResult {
  std::vector<double> photon_times;
  bool escaped = false;
  double escape_time = 0.0;  // valid when escaped
  // kinetic energy sampled on the uniform time grid while the atom lives
  std::vector<double> kinetic_energy_samples;
};

AtomRunResult run_atom(const MCConfig& cfg, const DressedField& field, rng::Stream& stream);

struct EnsembleResult {
  std::vector<double> time_grid;              // time_bins + 1 uniform samples
  std::vector<double> survival_fraction;      // non-increasing from 1
  std::vector<double> mean_photons;           // cumulative, per surviving atom
  std::vector<double> mean_kinetic_energy;    // J, survivors only
  std::vector<std::pair<int, double>> photon_events;  // (atom index, time)

  double loss_rate = 0.0;     // 1/s, from an exponential fit of the survival curve
  double scatter_rate = 0.0;  // photons/s per atom, slope of the photon curve

  int n_atoms = 0;
  int n_lost = 0;

  struct Diagnostics {
    double loss_rate_err = 0.0;
    double scatter_rate_err = 0.0;
    double survival_fit_amplitude = 0.0;
    double ke_heating_rate = 0.0;     // 1/s, exponential fit of the KE curve
    double ke_fit_amplitude = 0.0;    // J
    bool loss_rate_lower_bound = false;  // set when the curve cannot be fit
  } diagnostics;
};

EnsembleResult run_ensemble(const MCConfig& cfg, const DressedField& field,
                            int n_threads = 1);

struct RateMap {
  std::vector<double> s_grid;         // ascending
  std::vector<double> detuning_grid;  // rad/s, free-space detunings, ascending
  int n_atoms = 0;
  std::uint64_t seed = 0;

  struct Cell {
    double loss_rate = 0.0;
    double loss_rate_err = 0.0;
    double scatter_rate = 0.0;
    double scatter_rate_err = 0.0;
    int n_lost = 0;
    bool loss_rate_lower_bound = false;
  };
  std::vector<Cell> cells;  // row-major, index i_s * detuning_grid.size() + j

  const Cell& at(std::size_t i_s, std::size_t j_det) const {
    return cells[i_s * detuning_grid.size() + j_det];
  }
};

// Runs one ensemble per (s, detuning) grid cell. Grids are canonicalized by
// sorting; the cell seed is derived from (seed, i, j) in the sorted grids, so
// any permutation of the input produces identical per-cell results.
RateMap sweep_map(const MCConfig& cfg, const DressedField& field_template,
                  std::vector<double> s_grid, std::vector<double> detuning_grid,
                  int n_threads = 1);

// Ensemble for a single grid cell with the seed sweep_map would use.
EnsembleResult sweep_cell(const MCConfig& cfg, const DressedField& field_template,
                          double s, double detuning_free_space, std::uint64_t cell_seed,
                          int n_threads = 1);

}  // namespace ramankit::mc
