#include "rotor/field.hpp"
#include "rotor/bessel.hpp"
#include "rotor/constants.hpp"
#include "rotor/errors.hpp"

#include <cmath>

namespace rotor {

namespace {
constexpr double kTheta0 = 2.0 * kPi / 3.0;
const double kSqrt3 = std::sqrt(3.0);
} // namespace

double scalar_potential_2d(const LatticeSpec& spec, double r, double phi) {
    if (r < 0.0) throw ConfigError("scalar_potential_2d: r must be >= 0");
    const double q = 2.0 * kPi * r;
    double sum6 = 0.0, sum18 = 0.0;
    for (int m = 0; m < 3; ++m) {
        const double c = std::cos(phi - m * kTheta0);
        const double s = std::sin(phi - m * kTheta0);
        sum6 += std::cos(q * c);
        sum18 += std::cos(kSqrt3 * q * s);
    }
    return -spec.V0 / 3.0 - spec.V0 / 6.0 * sum6 - spec.V0 / 18.0 * sum18;
}

PlanarField fictitious_field_2d(const LatticeSpec& spec, double r, double phi) {
    if (r < 0.0) throw ConfigError("fictitious_field_2d: r must be >= 0");
    const double q = 2.0 * kPi * r;
    const double pref1 = spec.B0 / (9.0 * (2.0 * spec.nuclear_spin_I + 1.0));
    const double pref2 = spec.B0 / (3.0 * kSqrt3 * (2.0 * spec.nuclear_spin_I + 1.0));
    double br = 0.0, bphi = 0.0;
    for (int m = 0; m < 3; ++m) {
        const double c = std::cos(phi - m * kTheta0);
        const double s = std::sin(phi - m * kTheta0);
        const double f1 = std::sin(q * c) + std::sin(2.0 * q * c);
        const double f2 = std::sin(kSqrt3 * q * s);
        br += pref1 * c * f1 + pref2 * s * f2;
        bphi += -pref1 * s * f1 + pref2 * c * f2;
    }
    return {br, bphi};
}

FieldSample sample_field(const LatticeSpec& spec, double r, double phi) {
    const PlanarField b = fictitious_field_2d(spec, r, phi);
    return {r, phi, scalar_potential_2d(spec, r, phi), b.B_r, b.B_phi};
}

double isotropic_V(const LatticeSpec& spec, double r) {
    if (r < 0.0) throw ConfigError("isotropic_V: r must be >= 0");
    const double x = 2.0 * kPi * r;
    return -spec.V0 / 6.0 * (2.0 + 3.0 * bessel_j0(x) + bessel_j0(kSqrt3 * x));
}

double isotropic_B(const LatticeSpec& spec, double r) {
    if (r < 0.0) throw ConfigError("isotropic_B: r must be >= 0");
    const double x = 2.0 * kPi * r;
    const double bracket = bessel_j1(x) + bessel_j1(2.0 * x) + kSqrt3 * bessel_j1(kSqrt3 * x);
    return spec.B0 / (3.0 * (2.0 * spec.nuclear_spin_I + 1.0)) * bracket;
}

AnisotropyBounds anisotropy_bounds(const LatticeSpec& spec, double r) {
    if (r < 0.0) throw ConfigError("anisotropy_bounds: r must be >= 0");
    const double x = kPi * r;
    const double x5 = x * x * x * x * x;
    const double twoI1 = 2.0 * spec.nuclear_spin_I + 1.0;
    AnisotropyBounds out;
    out.dV1 = spec.V0 / 180.0 * x5 * x;
    out.dBr1 = spec.B0 / (120.0 * twoI1) * x5;
    out.dBphi1 = out.dBr1;
    return out;
}

std::complex<double> fourier_coefficient(const LatticeSpec& spec,
                                         FieldComponent field, int m, double r) {
    auto eval = [&](double phi) -> double {
        switch (field) {
            case FieldComponent::V: return scalar_potential_2d(spec, r, phi);
            case FieldComponent::Br: return fictitious_field_2d(spec, r, phi).B_r;
            default: return fictitious_field_2d(spec, r, phi).B_phi;
        }
    };
    // Trapezoid on the full circle is spectrally accurate for these smooth
    // periodic integrands; double the 3*2^k point count until stable.
    std::complex<double> prev{0.0, 0.0};
    for (int k = 4; k <= 14; ++k) {
        const int n = 3 << k;
        const double h = 2.0 * kPi / n;
        std::complex<double> acc{0.0, 0.0};
        for (int i = 0; i < n; ++i) {
            const double phi = i * h;
            acc += eval(phi) * std::exp(std::complex<double>(0.0, -6.0 * m * phi));
        }
        acc /= static_cast<double>(n);
        if (k > 4 && std::abs(acc - prev) < 1e-10) return acc;
        prev = acc;
    }
    return prev;
}

} // namespace rotor
