#include "rotor/constants.hpp"
#include "rotor/errors.hpp"

namespace rotor {

double recoil_energy_J(double mass_kg, double lambda_m) {
    if (mass_kg <= 0.0 || lambda_m <= 0.0)
        throw ConfigError("recoil_energy_J: mass and wavelength must be positive");
    return 2.0 * kPi * kPi * kHbar * kHbar / (mass_kg * lambda_m * lambda_m);
}

double recoil_temperature_uK(const AtomSpec& atom) {
    return recoil_energy_J(atom.mass_kg, atom.resonance_lambda_m) / kBoltzmann * 1e6;
}

const std::vector<AtomSpec>& atom_catalog() {
    // Resonance wavelengths: Lyman-alpha for 2H, D lines for the alkalis.
    static const std::vector<AtomSpec> atoms = {
        {"2H",   2.01410177812 * kAmu, 1.0, 0.5, kGElectron, 121.567e-9},
        {"6Li",  6.0151228874  * kAmu, 1.0, 0.5, kGElectron, 670.98e-9},
        {"7Li",  7.0160034366  * kAmu, 1.5, 1.0, kGElectron, 670.98e-9},
        {"23Na", 22.9897692820 * kAmu, 1.5, 1.0, kGElectron, 589.7558e-9},
        {"39K",  38.9637064864 * kAmu, 1.5, 1.0, kGElectron, 770.108e-9},
        {"40K",  39.96399848   * kAmu, 4.0, 4.5, kGElectron, 770.108e-9},
    };
    return atoms;
}

const AtomSpec& find_atom(std::string_view name) {
    for (const auto& a : atom_catalog())
        if (a.name == name) return a;
    throw ConfigError("unknown atom: " + std::string(name));
}

} // namespace rotor
