#pragma once

#include "rotor/constants.hpp"
#include "rotor/lattice.hpp"

#include <array>
#include <vector>

namespace rotor {

// Harmonic expansion scales of the lattice well.
struct HarmonicUnits {
    double b0_lambda0 = 0.0;      // harmonic length, lambda0 units
    double b0_m = 0.0;            // same in meters
    double hbar_Omega_h_E0 = 0.0; // harmonic energy, E0 units
    double Omega_h_rad_s = 0.0;   // rad/s (uses the atom mass)
};
HarmonicUnits harmonic_units(const LatticeSpec& spec, const AtomSpec& atom);

// Classical large-F state: position in b0 units, momentum in hbar/b0 units,
// f the unit spin direction. Time is reduced, s = Omega_h t.
struct ClassicalState {
    std::array<double, 2> r{0.0, 0.0};
    std::array<double, 2> p{0.0, 0.0};
    std::array<double, 3> f{0.0, 0.0, 1.0};
};

struct ClassicalDerivs {
    std::array<double, 2> dr{};
    std::array<double, 2> dp{};
    std::array<double, 3> df{};
};

// Hamilton equations in reduced units. The default force law is the
// power-series expansion of the potentials about the origin; full_bessel
// switches to the exact isotropic Bessel forms for validation.
ClassicalDerivs hamilton_rhs(const ClassicalState& state, const LatticeSpec& spec,
                             const AtomSpec& atom, bool full_bessel = false);

// Conserved energy in hbar Omega_h units for the active force law.
double reduced_energy(const ClassicalState& state, const LatticeSpec& spec, const AtomSpec& atom,
                      bool full_bessel = false);

struct TrajectoryPoint {
    double s = 0.0; // reduced time
    ClassicalState state;
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;
    double energy_initial = 0.0;  // hbar Omega_h units
    double max_energy_drift = 0.0; // relative to the initial energy scale
    double max_f_drift = 0.0;      // max | |f| - |f(0)| |, reported, never renormalized
};

// Fixed-step RK4. ds and s_end may both be negative to integrate backward;
// |ds| must not exceed 0.01 (one percent of the precession scale).
Trajectory integrate(const ClassicalState& initial, double s_end, double ds,
                     const LatticeSpec& spec, const AtomSpec& atom, int store_every = 1,
                     bool full_bessel = false);

// Orbit statistics: the radial annulus filled by the position and the ring
// traced by the in-plane spin projection. Integration proceeds in windows
// and stops once the cumulative radial extrema hold still (tol_r, in b0)
// over two consecutive windows; the spin ring is measured over that span.
struct RingStats {
    double r_min = 0.0;  // b0 units
    double r_max = 0.0;
    double f_inner = 0.0; // min |f_in_plane|
    double f_outer = 0.0;
    double s_end = 0.0;   // total reduced time integrated
    bool converged = false;
};
RingStats ring_statistics(const ClassicalState& initial, const LatticeSpec& spec,
                          const AtomSpec& atom, double ds = 5e-4, double window_s = 5.0,
                          int max_windows = 64, double tol_r = 1e-3);

} // namespace rotor
