#pragma once

#include "rotor/lattice.hpp"

#include <complex>

namespace rotor {

enum class FieldComponent { V, Br, Bphi };

struct FieldSample {
    double r = 0.0;     // lambda0 units
    double phi = 0.0;   // radians
    double V = 0.0;     // E0 units
    double B_r = 0.0;   // E0 units
    double B_phi = 0.0; // E0 units
};

// Scalar optical potential V(r,phi): hexagonal three-sum cosine expansion,
// theta0 = 2pi/3. r in lambda0 units, result in E0 units.
double scalar_potential_2d(const LatticeSpec& spec, double r, double phi);

// In-plane fictitious field components (B_r, B_phi) in E0 units.
struct PlanarField { double B_r, B_phi; };
PlanarField fictitious_field_2d(const LatticeSpec& spec, double r, double phi);

FieldSample sample_field(const LatticeSpec& spec, double r, double phi);

// Angle-averaged forms used by the radial solver:
// V~(r)  = -(V0/6) [2 + 3 J0(2 pi r) + J0(2 sqrt3 pi r)]
// B~(r)  = (B0 / (3(2I+1))) [J1(2 pi r) + J1(4 pi r) + sqrt3 J1(2 sqrt3 pi r)]
double isotropic_V(const LatticeSpec& spec, double r);
double isotropic_B(const LatticeSpec& spec, double r);

// Magnitudes of the leading (m = +-1) anisotropic corrections at small r:
// |V1| = (V0/180)(pi r)^6, |B_r1| = |B_phi1| = (B0/(120(2I+1)))(pi r)^5.
struct AnisotropyBounds { double dV1, dBr1, dBphi1; };
AnisotropyBounds anisotropy_bounds(const LatticeSpec& spec, double r);

// m-th coefficient of the six-fold Fourier series,
// F~_m(r) = (1/2pi) oint F(r,phi) exp(-i 6 m phi) dphi,
// by composite trapezoid with 3*2^k points doubled until the change < 1e-10.
std::complex<double> fourier_coefficient(const LatticeSpec& spec,
                                         FieldComponent field, int m, double r);

} // namespace rotor
