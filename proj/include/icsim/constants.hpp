#pragma once

#include <numbers>

// Physical constants (CODATA 2018 / SI exact values).
namespace icsim::constants {

inline constexpr double pi = std::numbers::pi;

inline constexpr double planck = 6.62607015e-34;             // J s (exact)
inline constexpr double hbar = planck / (2.0 * pi);          // J s
inline constexpr double boltzmann = 1.380649e-23;            // J/K (exact)
inline constexpr double elementary_charge = 1.602176634e-19; // C (exact)
inline constexpr double vacuum_permittivity = 8.8541878128e-12; // F/m
inline constexpr double atomic_mass_unit = 1.66053906660e-27;   // kg
inline constexpr double electron_mass_amu = 5.48579909065e-4;   // u

// 1/(4 pi eps0), N m^2 / C^2
inline constexpr double coulomb_constant =
    1.0 / (4.0 * pi * vacuum_permittivity);

} // namespace icsim::constants
