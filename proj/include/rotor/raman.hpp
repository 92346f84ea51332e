#pragma once

#include <complex>
#include <vector>

namespace rotor {

// Two-level Raman coupling between the lowest zeta = +-1/2 rotor states.
// All rates are angular frequencies (rad/s or any consistent unit):
//   omega_g  coupling strength, delta  two-photon detuning,
//   gamma    common decay rate, tau_p  pulse duration, T_delay  free time.
struct RamanConfig {
    double omega_g = 0.0;
    double delta = 0.0;
    double gamma = 0.0;
    double tau_p = 0.0;
    double T_delay = 0.0;
};

void validate(const RamanConfig& cfg); // throws ConfigError

// Dressed-state data of the non-Hermitian 2x2 Hamiltonian
//   H/hbar = [[-i gamma/2, omega_g/2], [omega_g/2, delta - i gamma/2]].
// Energies are returned divided by hbar. U and V are the real mixing
// amplitudes of the dressed states, U^2 + V^2 = 1.
struct RamanEigen {
    std::complex<double> eps_plus;
    std::complex<double> eps_minus;
    double mix_U = 0.0;
    double mix_V = 0.0;
    double omega_tilde = 0.0; // generalized Rabi frequency sqrt(delta^2 + omega_g^2)
};
RamanEigen raman_eigen(const RamanConfig& cfg);

struct TwoLevelAmplitudes {
    std::complex<double> up;   // zeta = +1/2 amplitude
    std::complex<double> down; // zeta = -1/2 amplitude
};

// Closed-form propagator over time t with the coupling on (omega_g as in cfg)
// applied to an arbitrary initial state. Setting omega_g = 0 gives the free
// segment used between Ramsey pulses.
TwoLevelAmplitudes evolve(const RamanConfig& cfg, double t, const TwoLevelAmplitudes& init);

// Population probabilities after driving for time t from the up state.
struct RabiProbabilities {
    double P_up = 0.0;
    double P_down = 0.0;
};
RabiProbabilities rabi_probabilities(const RamanConfig& cfg, double t);

// Ramsey sequence pulse(tau_p) - free(T_delay) - pulse(tau_p) from the up
// state; returns the transferred population |down|^2 for each detuning.
struct FringePoint {
    double delta = 0.0;
    double probability = 0.0;
};
std::vector<FringePoint> ramsey_scan(const RamanConfig& cfg, const std::vector<double>& deltas);

// Detuning of the central fringe maximum, refined by a local parabola.
// Throws MeasurementError if the scan has no interior maximum.
double resonance_estimate(const std::vector<FringePoint>& fringe);

} // namespace rotor
