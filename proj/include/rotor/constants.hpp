#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rotor {

// CODATA 2018 SI values.
inline constexpr double kHbar      = 1.054571817e-34;   // J s
inline constexpr double kBoltzmann = 1.380649e-23;      // J/K
inline constexpr double kMuBohr    = 9.2740100783e-24;  // J/T
inline constexpr double kClight    = 2.99792458e8;      // m/s
inline constexpr double kAmu       = 1.66053906660e-27; // kg
inline constexpr double kMu0Over4Pi = 1e-7;             // T^2 m^3 / J
inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kGElectron = 2.0;               // 2S1/2 spin g-factor

struct AtomSpec {
    std::string name;
    double mass_kg = 0.0;
    double nuclear_spin_I = 0.0;
    double total_F = 0.0;            // ground-state hyperfine F
    double g_factor = kGElectron;
    double resonance_lambda_m = 0.0; // principal resonance line, for recoil energy
};

// Recoil energy E0 = 2 pi^2 hbar^2 / (M lambda^2), joules.
double recoil_energy_J(double mass_kg, double lambda_m);

// Recoil temperature T0 = E0 / kB at the atom's resonance wavelength, microkelvin.
double recoil_temperature_uK(const AtomSpec& atom);

// Tabulated species (masses in u from the AME2020 evaluation).
const std::vector<AtomSpec>& atom_catalog();
const AtomSpec& find_atom(std::string_view name); // throws ConfigError if unknown

} // namespace rotor
