#include "rotor/classical.hpp"
#include "rotor/bessel.hpp"
#include "rotor/errors.hpp"
#include "rotor/field.hpp"

#include <algorithm>
#include <cmath>

namespace rotor {

namespace {

const double kSqrt3 = std::sqrt(3.0);

struct ReducedCouplings {
    double b0 = 0.0;    // lambda0 units
    double hw = 0.0;    // hbar Omega_h, E0 units
    double kappa = 0.0; // spin-position coupling
    double nu = 0.0;    // precession rate, kappa / F
    double F = 0.0;
};

ReducedCouplings couplings(const LatticeSpec& spec, const AtomSpec& atom) {
    validate(spec);
    if (!(atom.total_F > 0.0)) throw ConfigError("classical: atom needs total_F > 0");
    ReducedCouplings c;
    c.b0 = std::pow(2.0 / spec.V0, 0.25) / (2.0 * kPi);
    c.hw = std::sqrt(0.5 * spec.V0);
    c.F = atom.total_F;
    c.kappa = 2.0 * kPi * c.F * spec.B0 * c.b0 /
              ((2.0 * atom.nuclear_spin_I + 1.0) * c.hw);
    c.nu = c.kappa / c.F;
    return c;
}

double j1_prime(double x) {
    const double ax = std::abs(x);
    if (ax < 1e-3) {
        const double x2 = x * x;
        return 0.5 - 3.0 * x2 / 16.0 + 5.0 * x2 * x2 / 384.0;
    }
    return bessel_j0(x) - bessel_j1(x) / x;
}

// d/dr of the angle-averaged trapping potential, V0-scaled E0 per lambda0.
double isotropic_V_prime(const LatticeSpec& spec, double r) {
    return kPi * spec.V0 *
           (bessel_j1(2.0 * kPi * r) + (kSqrt3 / 3.0) * bessel_j1(2.0 * kSqrt3 * kPi * r));
}

// d/dr of the angle-averaged fictitious field magnitude.
double isotropic_B_prime(const LatticeSpec& spec, double r) {
    const double pref = spec.B0 / (3.0 * (2.0 * spec.nuclear_spin_I + 1.0));
    return pref * (2.0 * kPi * j1_prime(2.0 * kPi * r) + 4.0 * kPi * j1_prime(4.0 * kPi * r) +
                   kSqrt3 * 2.0 * kSqrt3 * kPi * j1_prime(2.0 * kSqrt3 * kPi * r));
}

ClassicalDerivs rhs_impl(const ClassicalState& st, const ReducedCouplings& c,
                         const LatticeSpec& spec, bool full_bessel) {
    ClassicalDerivs d;
    d.dr = {st.p[0], st.p[1]};

    if (!full_bessel) {
        d.dp = {-st.r[0] - c.kappa * st.f[0], -st.r[1] - c.kappa * st.f[1]};
        // df/ds = nu (R x f) with R = (X, Y, 0)
        d.df = {c.nu * st.r[1] * st.f[2], -c.nu * st.r[0] * st.f[2],
                c.nu * (st.r[0] * st.f[1] - st.r[1] * st.f[0])};
        return d;
    }

    const double Rmag = std::hypot(st.r[0], st.r[1]);
    if (Rmag < 1e-12) {
        // Series limit at the origin: harmonic force vanishes, B ~ B'(0) r.
        d.dp = {-c.kappa * st.f[0], -c.kappa * st.f[1]};
        d.df = {0.0, 0.0, 0.0};
        return d;
    }
    const double r_phys = c.b0 * Rmag; // lambda0 units
    const double rhat[2] = {st.r[0] / Rmag, st.r[1] / Rmag};
    const double f_dot_rhat = st.f[0] * rhat[0] + st.f[1] * rhat[1];

    const double Vp = isotropic_V_prime(spec, r_phys) * c.b0 / c.hw;
    const double B = isotropic_B(spec, r_phys);
    const double Bp = isotropic_B_prime(spec, r_phys) * c.b0 / c.hw;
    const double spin_rad = c.F * Bp * f_dot_rhat;          // radial spin force factor
    const double spin_tan = c.F * (B / c.hw) / Rmag;        // transverse factor

    for (int i = 0; i < 2; ++i) {
        const double grad_fdotr = (st.f[i] - f_dot_rhat * rhat[i]); // in-plane gradient of f.rhat times Rmag
        d.dp[i] = -Vp * rhat[i] - spin_rad * rhat[i] - spin_tan * grad_fdotr;
    }
    const double prec = B / c.hw; // df/ds = (B/hw) rhat x f
    d.df = {prec * rhat[1] * st.f[2], -prec * rhat[0] * st.f[2],
            prec * (rhat[0] * st.f[1] - rhat[1] * st.f[0])};
    return d;
}

ClassicalState rk4_step(const ClassicalState& st, double h, const ReducedCouplings& c,
                        const LatticeSpec& spec, bool full_bessel) {
    auto add = [](const ClassicalState& a, const ClassicalDerivs& d, double w) {
        ClassicalState out = a;
        for (int i = 0; i < 2; ++i) {
            out.r[i] += w * d.dr[i];
            out.p[i] += w * d.dp[i];
        }
        for (int i = 0; i < 3; ++i) out.f[i] += w * d.df[i];
        return out;
    };
    const ClassicalDerivs k1 = rhs_impl(st, c, spec, full_bessel);
    const ClassicalDerivs k2 = rhs_impl(add(st, k1, 0.5 * h), c, spec, full_bessel);
    const ClassicalDerivs k3 = rhs_impl(add(st, k2, 0.5 * h), c, spec, full_bessel);
    const ClassicalDerivs k4 = rhs_impl(add(st, k3, h), c, spec, full_bessel);
    ClassicalState out = st;
    for (int i = 0; i < 2; ++i) {
        out.r[i] += h / 6.0 * (k1.dr[i] + 2.0 * k2.dr[i] + 2.0 * k3.dr[i] + k4.dr[i]);
        out.p[i] += h / 6.0 * (k1.dp[i] + 2.0 * k2.dp[i] + 2.0 * k3.dp[i] + k4.dp[i]);
    }
    for (int i = 0; i < 3; ++i)
        out.f[i] += h / 6.0 * (k1.df[i] + 2.0 * k2.df[i] + 2.0 * k3.df[i] + k4.df[i]);
    return out;
}

double energy_impl(const ClassicalState& st, const ReducedCouplings& c, const LatticeSpec& spec,
                   bool full_bessel) {
    const double kinetic = 0.5 * (st.p[0] * st.p[0] + st.p[1] * st.p[1]);
    if (!full_bessel) {
        const double r2 = st.r[0] * st.r[0] + st.r[1] * st.r[1];
        return kinetic + 0.5 * r2 + c.kappa * (st.r[0] * st.f[0] + st.r[1] * st.f[1]);
    }
    const double Rmag = std::hypot(st.r[0], st.r[1]);
    const double r_phys = c.b0 * Rmag;
    const double pot = (isotropic_V(spec, r_phys) + spec.V0) / c.hw;
    double spin = 0.0;
    if (Rmag > 1e-12) {
        const double f_dot_rhat = (st.f[0] * st.r[0] + st.f[1] * st.r[1]) / Rmag;
        spin = c.F * isotropic_B(spec, r_phys) * f_dot_rhat / c.hw;
    }
    return kinetic + pot + spin;
}

} // namespace

HarmonicUnits harmonic_units(const LatticeSpec& spec, const AtomSpec& atom) {
    validate(spec);
    HarmonicUnits u;
    u.b0_lambda0 = std::pow(2.0 / spec.V0, 0.25) / (2.0 * kPi);
    u.b0_m = u.b0_lambda0 * spec.lambda0;
    u.hbar_Omega_h_E0 = std::sqrt(0.5 * spec.V0);
    u.Omega_h_rad_s = u.hbar_Omega_h_E0 * recoil_energy_J(atom.mass_kg, spec.lambda0) / kHbar;
    return u;
}

ClassicalDerivs hamilton_rhs(const ClassicalState& state, const LatticeSpec& spec,
                             const AtomSpec& atom, bool full_bessel) {
    return rhs_impl(state, couplings(spec, atom), spec, full_bessel);
}

double reduced_energy(const ClassicalState& state, const LatticeSpec& spec, const AtomSpec& atom,
                      bool full_bessel) {
    return energy_impl(state, couplings(spec, atom), spec, full_bessel);
}

Trajectory integrate(const ClassicalState& initial, double s_end, double ds,
                     const LatticeSpec& spec, const AtomSpec& atom, int store_every,
                     bool full_bessel) {
    if (ds == 0.0 || std::abs(ds) > 0.01)
        throw ConfigError("classical integrate: need 0 < |ds| <= 0.01 (reduced time)");
    if (s_end * ds < 0.0)
        throw ConfigError("classical integrate: s_end and ds must have the same sign");
    if (store_every < 1) throw ConfigError("classical integrate: store_every must be >= 1");
    const ReducedCouplings c = couplings(spec, atom);
    const long long n_steps = std::llround(s_end / ds);

    Trajectory traj;
    traj.energy_initial = energy_impl(initial, c, spec, full_bessel);
    const double e_scale = std::max(std::abs(traj.energy_initial), 1e-12);

    ClassicalState st = initial;
    const double fn0 = std::sqrt(initial.f[0] * initial.f[0] + initial.f[1] * initial.f[1] +
                                 initial.f[2] * initial.f[2]);
    traj.points.push_back({0.0, st});
    for (long long k = 1; k <= n_steps; ++k) {
        st = rk4_step(st, ds, c, spec, full_bessel);
        const double e = energy_impl(st, c, spec, full_bessel);
        traj.max_energy_drift =
            std::max(traj.max_energy_drift, std::abs(e - traj.energy_initial) / e_scale);
        const double fn = std::sqrt(st.f[0] * st.f[0] + st.f[1] * st.f[1] + st.f[2] * st.f[2]);
        traj.max_f_drift = std::max(traj.max_f_drift, std::abs(fn - fn0));
        if (k % store_every == 0 || k == n_steps) traj.points.push_back({k * ds, st});
    }
    return traj;
}

RingStats ring_statistics(const ClassicalState& initial, const LatticeSpec& spec,
                          const AtomSpec& atom, double ds, double window_s, int max_windows,
                          double tol_r) {
    if (!(ds > 0.0) || ds > 0.01)
        throw ConfigError("ring_statistics: need 0 < ds <= 0.01");
    if (!(window_s > 0.0) || max_windows < 3)
        throw ConfigError("ring_statistics: need positive window_s and max_windows >= 3");
    const ReducedCouplings c = couplings(spec, atom);
    const long long steps_per_window = std::max<long long>(1, std::llround(window_s / ds));

    RingStats stats;
    ClassicalState st = initial;
    double r0 = std::hypot(st.r[0], st.r[1]);
    double f0 = std::hypot(st.f[0], st.f[1]);
    stats.r_min = stats.r_max = r0;
    stats.f_inner = stats.f_outer = f0;

    // Stop once the cumulative radial extrema hold still over two
    // consecutive windows; the spin ring is reported over the same span.
    double prev_rmin = stats.r_min;
    double prev_rmax = stats.r_max;
    int stable_windows = 0;
    for (int w = 0; w < max_windows; ++w) {
        for (long long k = 0; k < steps_per_window; ++k) {
            st = rk4_step(st, ds, c, spec, false);
            const double r = std::hypot(st.r[0], st.r[1]);
            const double f = std::hypot(st.f[0], st.f[1]);
            stats.r_min = std::min(stats.r_min, r);
            stats.r_max = std::max(stats.r_max, r);
            stats.f_inner = std::min(stats.f_inner, f);
            stats.f_outer = std::max(stats.f_outer, f);
        }
        stats.s_end += window_s;
        const bool settled = std::abs(stats.r_min - prev_rmin) < tol_r &&
                             std::abs(stats.r_max - prev_rmax) < tol_r;
        stable_windows = (w > 0 && settled) ? stable_windows + 1 : 0;
        if (stable_windows >= 2) {
            stats.converged = true;
            break;
        }
        prev_rmin = stats.r_min;
        prev_rmax = stats.r_max;
    }
    return stats;
}

} // namespace rotor
