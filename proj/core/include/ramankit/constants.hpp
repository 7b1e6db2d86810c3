#pragma once

namespace ramankit::constants {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

// CODATA 2018 (h, kB, c exact by SI definition)
inline constexpr double planck_h = 6.62607015e-34;       // J s
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double boltzmann_kB = 1.380649e-23;     // J/K
inline constexpr double speed_of_light = 299792458.0;    // m/s
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg

inline constexpr double rb87_mass = 86.909180531 * atomic_mass_unit;  // kg

}  // namespace ramankit::constants
