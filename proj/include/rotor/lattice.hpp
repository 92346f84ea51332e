#pragma once

namespace rotor {

// Natural units: lengths in lambda0, energies in the recoil energy E0, so
// hbar^2/(2M) = 1/(4 pi^2). lambda0 is kept in meters for SI conversions at
// the sensing boundary. V0 and B0 are in units of E0.
struct LatticeSpec {
    double lambda0 = 670.8e-9;          // laser wavelength, m
    double V0 = 100.0;                  // scalar potential strength, E0
    double B0 = 180.0;                  // fictitious-field strength, E0
    double beta_mix = 0.7071067811865476; // polarization mixing, in (0, 1/sqrt2]
    double nuclear_spin_I = 1.0;
    double detuning_Delta = 0.0;        // laser detuning from resonance, rad/s
    double gamma_e = 0.0;               // excited-state decay rate, rad/s
};

// Throws ConfigError when an invariant is violated.
void validate(const LatticeSpec& spec);

struct PolarizabilityInputs {
    double dipole_moment_d0 = 0.0; // reduced dipole matrix element
    double omega_half = 0.0;       // 2P1/2 resonance, rad/s
    double omega_threehalf = 0.0;  // 2P3/2 resonance, rad/s
    double omega = 0.0;            // lattice laser, rad/s
};

struct Polarizabilities {
    double alpha0 = 0.0; // scalar
    double alpha1 = 0.0; // vector
};

// alpha0 = (d0^2/6hbar)[1/(w12 - w) + 1/(w32 - w)],
// alpha1 = (d0^2/3hbar)/(w12 - w) - (d0^2/6hbar)/(w32 - w).
Polarizabilities polarizabilities(const PolarizabilityInputs& in);

} // namespace rotor
