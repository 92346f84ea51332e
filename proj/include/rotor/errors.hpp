#pragma once

#include <stdexcept>
#include <string>

namespace rotor {

// Bad configuration, bad input file, out-of-contract argument. CLI exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Evaluating a formula at a pole (zero detuning, resonance). CLI exit code 2.
struct SingularityError : ConfigError {
    using ConfigError::ConfigError;
};

// Iterative solve failed to reach its tolerance. CLI exit code 3.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Measurement set inconsistent with the forward model. CLI exit code 4.
struct MeasurementError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace rotor
