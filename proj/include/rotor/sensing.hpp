#pragma once

#include "rotor/constants.hpp"
#include "rotor/spectrum.hpp"

#include <array>

namespace rotor {

// External fields acting on the rotor: magnetic field (tesla), rotation
// rate (rad/s), acceleration (m/s^2), all in the lattice frame.
struct FrameState {
    std::array<double, 3> B_ex{0.0, 0.0, 0.0};
    std::array<double, 3> Omega{0.0, 0.0, 0.0};
    std::array<double, 3> accel{0.0, 0.0, 0.0};
};

// Ground-level channel overlaps at the two operating intensities
// (V0, B0) = (10*scriptN, 18*scriptN) E0, scriptN = 5 and 10.
struct CalibrationPoint {
    double beta_z_half = 0.0;   // beta^z_{0,1/2}
    double beta_z_3half = 0.0;  // beta^z_{0,3/2}
    double beta_z_5half = 0.0;  // beta^z_{0,5/2}
    double beta_par_half = 0.0; // beta^par_{0,1/2}
    double rho_par_half = 0.0;  // rho^par_{0,1/2}, lambda0 units
};

struct CalibrationTable {
    AtomSpec atom;
    double lambda0 = 0.0; // m
    CalibrationPoint n5;
    CalibrationPoint n10;
    // Logarithmic derivatives (E0/x) dx/dE0 at the scriptN = 10 point,
    // from finite-difference spectrum solves at fixed laser intensity.
    double beta_log_derivative = 0.0;
    double rho_log_derivative = 0.0;

    double beta_tilde(int script_n) const; // 5*beta^z_{0,5/2} - 3*beta^z_{0,3/2}
};

// Populates the table by solving the radial problem at both intensities;
// with_sensitivities adds the four extra solves for the log derivatives.
CalibrationTable make_calibration(const AtomSpec& atom, double lambda0_m,
                                  const RadialGrid& grid = {}, bool with_sensitivities = true);

// Nine spectroscopic splittings: the combined ground splitting Delta0 per
// lattice plane (at scriptN = 10) and the differential splitting Delta1 per
// plane at both intensities. Plane (alpha, alpha') has normal alpha''; the
// cyclic assignments are (x,y,z), (y,z,x), (z,x,y). All entries rad/s.
struct MeasurementSet {
    std::array<double, 3> delta0{};    // planes xy, yz, zx
    std::array<double, 3> delta1_n5{}; // same plane order
    std::array<double, 3> delta1_n10{};
};

double zeeman_splitting(const CalibrationTable& cal, double B_z, const AtomSpec& atom);
double rotation_splitting(double Omega_z);
double acceleration_splitting(const CalibrationTable& cal, double a_par, const AtomSpec& atom);

// First-order energy corrections (joules) of the n = 0 doublet at +-zeta.
// |zeta| = 1/2 combines the axial and in-plane terms under a square root;
// |zeta| >= 3/2 is linear in the axial terms only.
struct FirstOrderShift {
    double plus = 0.0;  // +|zeta| member
    double minus = 0.0; // -|zeta| member
};
FirstOrderShift first_order_shifts(const CalibrationTable& cal, const FrameState& frame,
                                   int n, double zeta);

MeasurementSet forward_measurements(const CalibrationTable& cal, const FrameState& frame);

// Closed-form recovery of all nine frame components from a MeasurementSet.
// Throws MeasurementError on a negative in-plane radicand and ConfigError if
// the calibration is degenerate (beta_tilde(10) == beta_tilde(5)).
FrameState invert_measurements(const CalibrationTable& cal, const MeasurementSet& meas);

// Systematic accuracy budget driven by the laser linewidth delta_omega and
// the radiative-decay limit of the gyroscope.
struct AccuracyBudget {
    double omega_laser = 0.0;          // rad/s
    double delta_omega = 0.0;          // rad/s
    double beta_log_derivative = 0.0;  // sensitivity used for delta_B
    double rho_log_derivative = 0.0;   // sensitivity used for delta_a
    double delta_B_over_B = 0.0;       // 2|beta_log| * delta_omega/omega
    double delta_a_over_a = 0.0;       // 2|rho_log| * delta_omega/omega
    double gyro_radiative_coeff = 0.0; // delta_Omega_z / Omega_z^3, s^2
    double delta_Omega_earth = 0.0;    // rad/s at Earth's rotation rate
    double delta_B_u_over_B = 0.0;     // time-averaged forms, sqrt(delta_omega/(N T))
    double delta_Omega_u_per_Omega32 = 0.0;
    double delta_a_u_over_a = 0.0;
};
// Sensitivity overrides replace the table's finite-difference log
// derivatives when nonzero (useful for reproducing quoted budgets).
AccuracyBudget accuracy_budget(const CalibrationTable& cal, const AtomSpec& atom,
                               double delta_omega, double N_rotors, double T_meas,
                               double beta_log_override = 0.0, double rho_log_override = 0.0);

// Shot-noise budget of the Raman phase measurement.
struct PulseSpec {
    double N_p = 0.0; // pump photon number
    double N_s = 0.0; // Stokes photon number
    double tau = 0.0; // pulse duration, s
};
// Photon number of a pulse of intensity I (W/m^2) over a beam of radius
// r_b (m) lasting tau (s) at photon angular frequency omega (rad/s).
double photon_number(double intensity, double beam_radius, double tau, double omega);

struct ShotNoiseBudget {
    double delta_phi = 0.0;      // Raman phase uncertainty, rad
    double delta_DeltaQR = 0.0;  // splitting uncertainty, rad/s (single rotor)
    double delta_B = 0.0;        // tesla, with 1/sqrt(N_rotors)
    double delta_Omega = 0.0;    // rad/s
    double delta_a = 0.0;        // m/s^2
};
ShotNoiseBudget shot_noise_budget(const AtomSpec& atom, const CalibrationTable& cal,
                                  const PulseSpec& pulse, double N_rotors);

} // namespace rotor
