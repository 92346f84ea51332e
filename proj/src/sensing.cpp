#include "rotor/sensing.hpp"
#include "rotor/errors.hpp"

#include <cmath>
#include <iostream>
#include <string>

namespace rotor {

namespace {

constexpr double kEarthRotation = 72.722e-6; // rad/s

// Reduced magnetic coupling g mu_B / (2I+1), J/T.
double g_tilde(const AtomSpec& atom) {
    return atom.g_factor * kMuBohr / (2.0 * atom.nuclear_spin_I + 1.0);
}

// Cyclic plane assignments (alpha, alpha', alpha'') for planes xy, yz, zx.
constexpr int kPlaneAxes[3][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}};

CalibrationPoint calibration_point(const AtomSpec& atom, double lambda0_m, double script_n,
                                   double zeta_max, const RadialGrid& grid) {
    LatticeSpec spec;
    spec.lambda0 = lambda0_m;
    spec.V0 = 10.0 * script_n;
    spec.B0 = 18.0 * script_n;
    spec.nuclear_spin_I = atom.nuclear_spin_I;
    const SpectrumResult result = solve_spectrum(spec, 1, zeta_max, grid);

    CalibrationPoint p;
    const OverlapIntegrals half = overlap_integrals(result, 0, 0.5);
    p.beta_z_half = half.beta_z;
    p.beta_par_half = half.beta_par;
    p.rho_par_half = half.rho_par;
    if (zeta_max > 1.0) {
        p.beta_z_3half = overlap_integrals(result, 0, 1.5).beta_z;
        p.beta_z_5half = overlap_integrals(result, 0, 2.5).beta_z;
    }
    return p;
}

void warn_if_nonperturbative(const CalibrationTable& cal, double shift_J) {
    const double E0 = recoil_energy_J(cal.atom.mass_kg, cal.lambda0);
    if (std::abs(shift_J) > 0.1 * E0)
        std::cerr << "warning: first-order shift " << shift_J
                  << " J is not small against the level scale " << E0 << " J\n";
}

} // namespace

double CalibrationTable::beta_tilde(int script_n) const {
    const CalibrationPoint& p = (script_n == 5) ? n5 : n10;
    if (script_n != 5 && script_n != 10)
        throw ConfigError("calibration: script_n must be 5 or 10");
    return 5.0 * p.beta_z_5half - 3.0 * p.beta_z_3half;
}

CalibrationTable make_calibration(const AtomSpec& atom, double lambda0_m, const RadialGrid& grid,
                                  bool with_sensitivities) {
    if (!(lambda0_m > 0.0)) throw ConfigError("make_calibration: lambda0 must be positive");
    CalibrationTable cal;
    cal.atom = atom;
    cal.lambda0 = lambda0_m;
    cal.n5 = calibration_point(atom, lambda0_m, 5.0, 2.5, grid);
    cal.n10 = calibration_point(atom, lambda0_m, 10.0, 2.5, grid);

    if (with_sensitivities) {
        // E0 -> E0 (1 + h) at fixed laser intensity rescales (V0, B0) by
        // 1/(1 + h). Central differences at h and 2h with a Richardson step.
        auto log_derivs = [&](double h, double& beta_log, double& rho_log) {
            const CalibrationPoint hi = calibration_point(atom, lambda0_m, 10.0 / (1.0 + h), 0.5, grid);
            const CalibrationPoint lo = calibration_point(atom, lambda0_m, 10.0 / (1.0 - h), 0.5, grid);
            beta_log = (hi.beta_z_half - lo.beta_z_half) / (2.0 * h) / cal.n10.beta_z_half;
            rho_log = (hi.rho_par_half - lo.rho_par_half) / (2.0 * h) / cal.n10.rho_par_half;
        };
        double b1 = 0.0, r1 = 0.0, b2 = 0.0, r2 = 0.0;
        log_derivs(1e-3, b1, r1);
        log_derivs(2e-3, b2, r2);
        if (std::abs(b1 - b2) > 0.05 * std::abs(b1) || std::abs(r1 - r2) > 0.05 * std::abs(r1))
            throw SolverError("make_calibration: sensitivity finite differences disagree");
        cal.beta_log_derivative = (4.0 * b1 - b2) / 3.0;
        cal.rho_log_derivative = (4.0 * r1 - r2) / 3.0;
    }
    return cal;
}

double zeeman_splitting(const CalibrationTable& cal, double B_z, const AtomSpec& atom) {
    return g_tilde(atom) * cal.n10.beta_z_half * B_z / kHbar;
}

double rotation_splitting(double Omega_z) { return Omega_z; }

double acceleration_splitting(const CalibrationTable& cal, double a_par, const AtomSpec& atom) {
    const double rho_m = cal.n10.rho_par_half * cal.lambda0;
    return atom.mass_kg * a_par * rho_m / kHbar;
}

FirstOrderShift first_order_shifts(const CalibrationTable& cal, const FrameState& frame,
                                   int n, double zeta) {
    if (n != 0) throw ConfigError("first_order_shifts: calibration covers the n = 0 level only");
    const double az = std::abs(zeta);
    const double gt = g_tilde(cal.atom);
    const double rho_m = cal.n10.rho_par_half * cal.lambda0;
    const double M = cal.atom.mass_kg;

    FirstOrderShift out;
    if (std::abs(az - 0.5) < 1e-9) {
        const double axial = gt * cal.n10.beta_z_half * frame.B_ex[2] + kHbar * frame.Omega[2];
        const double ux = gt * cal.n10.beta_par_half * frame.B_ex[0] + M * rho_m * frame.accel[0];
        const double uy = gt * cal.n10.beta_par_half * frame.B_ex[1] + M * rho_m * frame.accel[1];
        const double root = std::sqrt(axial * axial + ux * ux + uy * uy);
        out.plus = 0.5 * root;
        out.minus = -0.5 * root;
    } else if (std::abs(az - 1.5) < 1e-9 || std::abs(az - 2.5) < 1e-9) {
        const double beta = (std::abs(az - 1.5) < 1e-9) ? cal.n10.beta_z_3half : cal.n10.beta_z_5half;
        const double axial = gt * beta * frame.B_ex[2] + kHbar * frame.Omega[2];
        out.plus = az * axial;
        out.minus = -az * axial;
    } else {
        throw ConfigError("first_order_shifts: zeta must be one of +-1/2, +-3/2, +-5/2");
    }
    warn_if_nonperturbative(cal, out.plus);
    return out;
}

MeasurementSet forward_measurements(const CalibrationTable& cal, const FrameState& frame) {
    const double gt = g_tilde(cal.atom);
    const double rho_m = cal.n10.rho_par_half * cal.lambda0;
    const double M = cal.atom.mass_kg;
    const double bt5 = cal.beta_tilde(5);
    const double bt10 = cal.beta_tilde(10);

    MeasurementSet meas;
    for (int p = 0; p < 3; ++p) {
        const int a = kPlaneAxes[p][0], ap = kPlaneAxes[p][1], axis = kPlaneAxes[p][2];
        const double axial = gt * cal.n10.beta_z_half * frame.B_ex[axis] + kHbar * frame.Omega[axis];
        const double ua = gt * cal.n10.beta_par_half * frame.B_ex[a] + M * rho_m * frame.accel[a];
        const double uap = gt * cal.n10.beta_par_half * frame.B_ex[ap] + M * rho_m * frame.accel[ap];
        meas.delta0[p] = std::sqrt(axial * axial + ua * ua + uap * uap) / kHbar;
        meas.delta1_n5[p] = gt * bt5 * frame.B_ex[axis] / kHbar + 2.0 * frame.Omega[axis];
        meas.delta1_n10[p] = gt * bt10 * frame.B_ex[axis] / kHbar + 2.0 * frame.Omega[axis];
        warn_if_nonperturbative(cal, kHbar * meas.delta0[p]);
    }
    return meas;
}

FrameState invert_measurements(const CalibrationTable& cal, const MeasurementSet& meas) {
    const double gt = g_tilde(cal.atom);
    const double rho_m = cal.n10.rho_par_half * cal.lambda0;
    const double M = cal.atom.mass_kg;
    const double bt5 = cal.beta_tilde(5);
    const double bt10 = cal.beta_tilde(10);
    const double dbt = bt10 - bt5;
    if (std::abs(dbt) < 1e-12 * std::max(std::abs(bt10), std::abs(bt5)))
        throw ConfigError("invert_measurements: calibration is degenerate, beta_tilde(10) == beta_tilde(5)");

    FrameState frame;
    for (int p = 0; p < 3; ++p) {
        const int axis = kPlaneAxes[p][2];
        frame.B_ex[axis] = kHbar * (meas.delta1_n10[p] - meas.delta1_n5[p]) / (gt * dbt);
        frame.Omega[axis] = (bt10 * meas.delta1_n5[p] - bt5 * meas.delta1_n10[p]) / (2.0 * dbt);
    }

    // In-plane magnitudes from the three Delta0 values.
    double A[3];    // A[p] = u_alpha^2 + u_alpha'^2 for plane p
    double Amax = 0.0;
    for (int p = 0; p < 3; ++p) {
        const int axis = kPlaneAxes[p][2];
        const double axial = gt * cal.n10.beta_z_half * frame.B_ex[axis] + kHbar * frame.Omega[axis];
        const double hd = kHbar * meas.delta0[p];
        A[p] = hd * hd - axial * axial;
        Amax = std::max(Amax, std::max(hd * hd, axial * axial));
    }
    // u_x^2 = (A_xy + A_zx - A_yz)/2 and cyclic.
    const double u2[3] = {0.5 * (A[0] + A[2] - A[1]), 0.5 * (A[0] + A[1] - A[2]),
                          0.5 * (A[1] + A[2] - A[0])};
    for (int axis = 0; axis < 3; ++axis) {
        double radicand = u2[axis];
        if (radicand < 0.0) {
            if (radicand < -1e-12 * Amax - 1e-300)
                throw MeasurementError("invert_measurements: negative in-plane radicand on axis " +
                                       std::to_string(axis));
            radicand = 0.0;
        }
        const double u = std::sqrt(radicand); // positive-root branch
        frame.accel[axis] = (u - gt * cal.n10.beta_par_half * frame.B_ex[axis]) / (M * rho_m);
    }
    return frame;
}

AccuracyBudget accuracy_budget(const CalibrationTable& cal, const AtomSpec& atom,
                               double delta_omega, double N_rotors, double T_meas,
                               double beta_log_override, double rho_log_override) {
    if (!(delta_omega >= 0.0)) throw ConfigError("accuracy_budget: delta_omega must be non-negative");
    if (!(N_rotors > 0.0) || !(T_meas > 0.0))
        throw ConfigError("accuracy_budget: N_rotors and T_meas must be positive");

    AccuracyBudget out;
    out.omega_laser = 2.0 * kPi * kClight / cal.lambda0;
    out.delta_omega = delta_omega;
    out.beta_log_derivative = (beta_log_override != 0.0) ? beta_log_override : cal.beta_log_derivative;
    out.rho_log_derivative = (rho_log_override != 0.0) ? rho_log_override : cal.rho_log_derivative;
    if (out.beta_log_derivative == 0.0 || out.rho_log_derivative == 0.0)
        throw ConfigError("accuracy_budget: calibration lacks sensitivity derivatives");

    const double frac = delta_omega / out.omega_laser;
    out.delta_B_over_B = 2.0 * std::abs(out.beta_log_derivative) * frac;
    out.delta_a_over_a = 2.0 * std::abs(out.rho_log_derivative) * frac;

    const double g = atom.g_factor;
    out.gyro_radiative_coeff =
        kMu0Over4Pi * 4.0 * g * g * kMuBohr * kMuBohr / (3.0 * kHbar * std::pow(kClight, 3));
    out.delta_Omega_earth = out.gyro_radiative_coeff * std::pow(kEarthRotation, 3);

    const double avg = std::sqrt(delta_omega / (N_rotors * T_meas));
    out.delta_B_u_over_B = 2.0 * std::abs(out.beta_log_derivative) / out.omega_laser * avg;
    out.delta_a_u_over_a = 2.0 * std::abs(out.rho_log_derivative) / out.omega_laser * avg;
    out.delta_Omega_u_per_Omega32 = std::sqrt(out.gyro_radiative_coeff / (N_rotors * T_meas));
    return out;
}

double photon_number(double intensity, double beam_radius, double tau, double omega) {
    if (!(intensity >= 0.0) || !(beam_radius > 0.0) || !(tau > 0.0) || !(omega > 0.0))
        throw ConfigError("photon_number: need non-negative intensity and positive r_b, tau, omega");
    return kPi * beam_radius * beam_radius * tau * intensity / (kHbar * omega);
}

ShotNoiseBudget shot_noise_budget(const AtomSpec& atom, const CalibrationTable& cal,
                                  const PulseSpec& pulse, double N_rotors) {
    if (!(pulse.N_p > 0.0) || !(pulse.N_s > 0.0))
        throw ConfigError("shot_noise_budget: photon numbers must be positive");
    if (!(pulse.tau > 0.0)) throw ConfigError("shot_noise_budget: tau must be positive");
    if (!(N_rotors > 0.0)) throw ConfigError("shot_noise_budget: N_rotors must be positive");

    ShotNoiseBudget out;
    const double shot = 1.0 / std::sqrt(pulse.N_p) + 1.0 / std::sqrt(pulse.N_s);
    out.delta_phi = 0.5 * kPi * shot;
    out.delta_DeltaQR = (1.92 / pulse.tau) * shot;

    const double sqrtN = std::sqrt(N_rotors);
    const double gt = g_tilde(atom);
    const double rho_m = cal.n10.rho_par_half * cal.lambda0;
    out.delta_B = kHbar * out.delta_DeltaQR / (gt * cal.n10.beta_z_half * sqrtN);
    out.delta_Omega = out.delta_DeltaQR / sqrtN;
    out.delta_a = kHbar * out.delta_DeltaQR / (atom.mass_kg * rho_m * sqrtN);
    return out;
}

} // namespace rotor
