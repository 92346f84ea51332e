#pragma once

#include "rotor/banded.hpp"
#include "rotor/lattice.hpp"

#include <vector>

namespace rotor {

// Uniform radial grid on (0, r_max) with Dirichlet ends; interior points
// r_i = i * spacing, i = 1..n_points. Lengths in lambda0 units.
//
// The default resolution is spacing ~ lambda0/640, the reference grid on
// which all quoted level energies and overlap integrals of this toolkit
// are defined. The zeta = 1/2 sector carries an exactly critical -C(r)/4
// attraction in its m = 0 channel, so plain central differences converge
// only logarithmically there; quoted values are tied to this resolution
// rather than to an (unreachable at order 2) continuum extrapolation.
struct RadialGrid {
    double r_max = 1.6;
    int n_points = 1024;

    double spacing() const { return r_max / (n_points + 1); }
    std::vector<double> radii() const;
};

void validate(const RadialGrid& grid); // throws ConfigError

// One radial level of the coupled two-channel problem at fixed zeta.
// psi_up / psi_down live on the interior grid and are normalized so that
// spacing * sum(psi_up^2 + psi_down^2) = 1. Energy in E0 units.
struct RadialLevel {
    int n = 0;
    double zeta = 0.0;
    double energy = 0.0;
    std::vector<double> psi_up;
    std::vector<double> psi_down;
};

struct SpectrumResult {
    LatticeSpec spec;
    RadialGrid grid;
    std::vector<RadialLevel> levels;  // ordered by |zeta|, sign, then n
    double grid_error_estimate = 0.0; // max eigenvalue change on last grid doubling, E0

    const RadialLevel& level(int n, double zeta) const; // throws ConfigError if absent
};

// Two-channel finite-difference Hamiltonian at fixed zeta, interleaved
// (point, spin) ordering: index 2*(i-1) is the sigma=+1/2 channel at r_i,
// index 2*(i-1)+1 the sigma=-1/2 channel. Bandwidth 2.
BandedSymmetric assemble_hamiltonian(const LatticeSpec& spec, double zeta, const RadialGrid& grid);

// Lowest n_max levels for every zeta in {+-1/2, +-3/2, ..., +-zeta_max}.
// Solves on the supplied grid; grid_error_estimate reports the largest
// eigenvalue shift under one diagnostic grid doubling. When refine_tol > 0
// the grid is doubled (up to three times) until the shift drops below
// refine_tol, and SolverError is thrown if the tolerance cannot be met;
// the result is then reported on the finest grid. The default reference
// grid is not gated: the critical zeta = 1/2 origin channel converges
// only logarithmically, so its estimate stays at the few-1e-2 E0 level.
SpectrumResult solve_spectrum(const LatticeSpec& spec, int n_max, double zeta_max,
                              RadialGrid grid = {}, double refine_tol = 0.0);

// Areal probability density (psi_up^2 + psi_down^2) / (2 pi r) at radius r
// (lambda0 units), linearly interpolated between grid points.
double areal_density(const SpectrumResult& result, int n, double zeta, double r);

// Radius of the density maximum, parabolically refined on the grid.
double density_peak_radius(const SpectrumResult& result, int n, double zeta);

// Channel overlap integrals of one level (trapezoid on the grid):
//   beta_z     = integral psi_up psi_down dr
//   beta_par   = (1/2) integral (psi_up^2 - psi_down^2) dr
//   rho_par    = integral (psi_up^2 + psi_down^2) r dr   [lambda0 units]
struct OverlapIntegrals {
    double beta_z = 0.0;
    double beta_par = 0.0;
    double rho_par = 0.0;
};
OverlapIntegrals overlap_integrals(const SpectrumResult& result, int n, double zeta);

// Expectation values characterizing the rotor state (spin-1/2 internal doublet):
//   <l_z> = zeta - beta_z, <l_z^2> = zeta^2 + 1/4 - 2 zeta beta_z, <F_z> = beta_z.
struct ExoticExpectations {
    double mean_lz = 0.0;
    double mean_lz2 = 0.0;
    double mean_Fz = 0.0;
};
ExoticExpectations exotic_expectations(const SpectrumResult& result, int n, double zeta);

// Photon-scattering loss rates (s^-1) of one level. Gamma_ground uses the
// lattice's electronic linewidth gamma_e and detuning Delta (rad/s, SI);
// Gamma_hyperfine uses the pair (gamma_hf, Delta_hf). Signed values are
// reported; hyperfine_negligible flags |Gamma_hf| < 1% of |Gamma_ground|.
struct LossRates {
    double Gamma_ground = 0.0;
    double Gamma_hyperfine = 0.0;
    bool hyperfine_negligible = true;
};
LossRates loss_rates(const SpectrumResult& result, int n, double zeta, double mass_kg,
                     double gamma_hf = 0.0, double Delta_hf = 0.0);

} // namespace rotor
