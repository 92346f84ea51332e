#include "rotor/raman.hpp"
#include "rotor/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rotor {

namespace {

using cd = std::complex<double>;
const cd kI(0.0, 1.0);

double sinc(double x) {
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}

// 2x2 propagator for duration t at coupling omega_g (possibly zero).
struct Propagator {
    cd m11, m12, m21, m22;
};

Propagator propagator(double omega_g, double delta, double gamma, double t) {
    const double omega = std::hypot(delta, omega_g);
    const double half = 0.5 * omega * t;
    const double c = std::cos(half);
    const double s_over = 0.5 * t * sinc(half); // sin(half)/omega, finite as omega -> 0
    const cd envelope = std::exp(cd(-0.5 * gamma * t, -0.5 * delta * t));
    Propagator P;
    P.m11 = envelope * (cd(c, 0.0) + kI * (delta * s_over));
    P.m22 = envelope * (cd(c, 0.0) - kI * (delta * s_over));
    P.m12 = envelope * (-kI * (omega_g * s_over));
    P.m21 = P.m12;
    return P;
}

TwoLevelAmplitudes apply(const Propagator& P, const TwoLevelAmplitudes& x) {
    return {P.m11 * x.up + P.m12 * x.down, P.m21 * x.up + P.m22 * x.down};
}

} // namespace

void validate(const RamanConfig& cfg) {
    if (cfg.omega_g < 0.0) throw ConfigError("raman: omega_g must be non-negative");
    if (cfg.gamma < 0.0) throw ConfigError("raman: gamma must be non-negative");
    if (cfg.tau_p < 0.0) throw ConfigError("raman: tau_p must be non-negative");
    if (cfg.T_delay < 0.0) throw ConfigError("raman: T_delay must be non-negative");
}

RamanEigen raman_eigen(const RamanConfig& cfg) {
    validate(cfg);
    RamanEigen out;
    out.omega_tilde = std::hypot(cfg.delta, cfg.omega_g);
    const cd base = 0.5 * (cd(cfg.delta, 0.0) - kI * cfg.gamma);
    out.eps_plus = base + 0.5 * out.omega_tilde;
    out.eps_minus = base - 0.5 * out.omega_tilde;
    if (out.omega_tilde > 0.0) {
        out.mix_U = std::sqrt(0.5 * (out.omega_tilde + cfg.delta) / out.omega_tilde);
        out.mix_V = std::sqrt(0.5 * (out.omega_tilde - cfg.delta) / out.omega_tilde);
    } else {
        out.mix_U = 1.0;
        out.mix_V = 0.0;
    }
    return out;
}

TwoLevelAmplitudes evolve(const RamanConfig& cfg, double t, const TwoLevelAmplitudes& init) {
    validate(cfg);
    if (t < 0.0) throw ConfigError("raman: evolution time must be non-negative");
    return apply(propagator(cfg.omega_g, cfg.delta, cfg.gamma, t), init);
}

RabiProbabilities rabi_probabilities(const RamanConfig& cfg, double t) {
    const TwoLevelAmplitudes fin = evolve(cfg, t, {cd(1.0, 0.0), cd(0.0, 0.0)});
    return {std::norm(fin.up), std::norm(fin.down)};
}

std::vector<FringePoint> ramsey_scan(const RamanConfig& cfg, const std::vector<double>& deltas) {
    validate(cfg);
    if (deltas.empty()) throw ConfigError("ramsey_scan: empty detuning grid");
    std::vector<FringePoint> fringe;
    fringe.reserve(deltas.size());
    for (double d : deltas) {
        const Propagator pulse = propagator(cfg.omega_g, d, cfg.gamma, cfg.tau_p);
        const Propagator free_seg = propagator(0.0, d, cfg.gamma, cfg.T_delay);
        TwoLevelAmplitudes state{cd(1.0, 0.0), cd(0.0, 0.0)};
        state = apply(pulse, state);
        state = apply(free_seg, state);
        state = apply(pulse, state);
        fringe.push_back({d, std::norm(state.down)});
    }
    return fringe;
}

double resonance_estimate(const std::vector<FringePoint>& fringe) {
    if (fringe.size() < 3) throw ConfigError("resonance_estimate: need at least 3 fringe points");
    size_t imax = 0;
    for (size_t i = 1; i < fringe.size(); ++i)
        if (fringe[i].probability > fringe[imax].probability) imax = i;
    if (imax == 0 || imax + 1 == fringe.size())
        throw MeasurementError("resonance_estimate: fringe maximum lies on the scan boundary");
    // Parabola through the three points around the maximum (grid may be uneven).
    const double x0 = fringe[imax - 1].delta, y0 = fringe[imax - 1].probability;
    const double x1 = fringe[imax].delta, y1 = fringe[imax].probability;
    const double x2 = fringe[imax + 1].delta, y2 = fringe[imax + 1].probability;
    const double d01 = (y1 - y0) / (x1 - x0);
    const double d12 = (y2 - y1) / (x2 - x1);
    const double curv = (d12 - d01) / (x2 - x0);
    if (curv == 0.0) return x1;
    return 0.5 * (x0 + x1 - d01 / curv);
}

} // namespace rotor
