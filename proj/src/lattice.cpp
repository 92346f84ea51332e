#include "rotor/lattice.hpp"
#include "rotor/constants.hpp"
#include "rotor/errors.hpp"

#include <cmath>

namespace rotor {

void validate(const LatticeSpec& spec) {
    if (spec.lambda0 <= 0.0)
        throw ConfigError("lattice: lambda0 must be positive");
    if (spec.V0 <= 0.0)
        throw ConfigError("lattice: V0 must be positive");
    const double bmax = 1.0 / std::sqrt(2.0);
    if (!(spec.beta_mix > 0.0) || spec.beta_mix > bmax + 1e-12)
        throw ConfigError("lattice: beta_mix must lie in (0, 1/sqrt2]");
    if (spec.nuclear_spin_I < 0.0)
        throw ConfigError("lattice: nuclear spin must be non-negative");
}

Polarizabilities polarizabilities(const PolarizabilityInputs& in) {
    if (!(in.omega < in.omega_half && in.omega_half < in.omega_threehalf))
        throw ConfigError("polarizabilities: need omega < omega_half < omega_threehalf");
    const double d12 = in.omega_half - in.omega;
    const double d32 = in.omega_threehalf - in.omega;
    if (d12 == 0.0 || d32 == 0.0)
        throw SingularityError("polarizabilities: laser on resonance");
    const double d2h = in.dipole_moment_d0 * in.dipole_moment_d0 / kHbar;
    Polarizabilities out;
    out.alpha0 = d2h / 6.0 * (1.0 / d12 + 1.0 / d32);
    out.alpha1 = d2h / 3.0 / d12 - d2h / 6.0 / d32;
    return out;
}

} // namespace rotor
