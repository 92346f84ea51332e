#pragma once

#include "rotor/classical.hpp"
#include "rotor/raman.hpp"
#include "rotor/sensing.hpp"
#include "rotor/spectrum.hpp"

#include "json.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace rotor {

using json = nlohmann::json;

// ---- output plumbing -------------------------------------------------------

// Joins a relative path onto $ROTOR_OUT_DIR when that variable is set.
std::string resolve_output_path(const std::string& path);

// Numeric CSV table with '#' comment lines; the timestamp header line is
// optional so that repeated runs can be byte-identical.
void write_table(std::ostream& os, const std::vector<std::string>& comments,
                 const std::vector<std::string>& columns,
                 const std::vector<std::vector<double>>& rows, bool timestamp_header);

// ---- domain serialization ---------------------------------------------------

json atom_to_json(const AtomSpec& atom);
AtomSpec atom_from_json(const json& j);

json lattice_to_json(const LatticeSpec& spec);
LatticeSpec lattice_from_json(const json& j);

json spectrum_to_json(const SpectrumResult& result);
SpectrumResult spectrum_from_json(const json& j);

json calibration_to_json(const CalibrationTable& cal);
CalibrationTable calibration_from_json(const json& j);

json frame_to_json(const FrameState& frame);
FrameState frame_from_json(const json& j);

json budgets_to_json(const AccuracyBudget& acc, const ShotNoiseBudget& shot);

// Measurement sets as CSV rows (plane, script_n, delta). script_n = 0 marks
// the combined splitting Delta0, which is taken at the script_n = 10 point.
void write_measurements_csv(std::ostream& os, const MeasurementSet& meas, bool timestamp_header);
MeasurementSet read_measurements_csv(std::istream& is);

// ---- run configuration ------------------------------------------------------

enum class Command {
    Field,
    Spectrum,
    Density,
    Raman,
    Ramsey,
    SenseForward,
    SenseInvert,
    Budget,
    Classical,
};

std::string command_name(Command c);
Command command_from_name(const std::string& name);

struct FieldParams {
    double r_min = 0.0;
    double r_max = 0.45;
    int n_r = 46;
    int n_phi = 13;
};

struct SpectrumParams {
    int n_max = 2;
    double zeta_max = 2.5;
    RadialGrid grid;
};

struct DensityParams {
    SpectrumParams spectrum;
    int level_n = 0;
    double level_zeta = 0.5;
    int n_samples = 400;
};

struct RamanParams {
    RamanConfig cfg;
    double t_max = 0.0;
    int n_t = 200;
};

struct RamseyParams {
    RamanConfig cfg;
    double delta_min = 0.0;
    double delta_max = 0.0;
    int n_delta = 201;
};

struct SenseForwardParams {
    FrameState frame;
    std::string calibration_path; // load instead of solving when set
    std::string calibration_out;  // optionally persist a fresh calibration
    RadialGrid grid;
};

struct SenseInvertParams {
    std::string measurements_path;
    std::string calibration_path;
    RadialGrid grid;
};

struct BudgetParams {
    double delta_omega = 0.0;
    double N_rotors = 1.0;
    double T_meas = 1.0;
    double N_p = 0.0;
    double N_s = 0.0;
    double tau = 0.0;
    double beta_sensitivity = 0.0; // overrides the finite-difference value when nonzero
    double rho_sensitivity = 0.0;
    std::string calibration_path;
    RadialGrid grid;
};

struct ClassicalRunParams {
    ClassicalState init;
    double ds = 5e-4;
    double s_end = 400.0;
    int store_every = 100;
    bool full_bessel = false;
    std::string mode = "trajectory"; // or "rings"
};

struct RunConfig {
    Command command = Command::Spectrum;
    std::string atom_name = "6Li"; // catalog key; empty means inline atom object
    AtomSpec atom;
    LatticeSpec lattice;
    std::string output_path; // empty writes to stdout
    std::string output_format = "csv";

    FieldParams field;
    SpectrumParams spectrum;
    DensityParams density;
    RamanParams raman;
    RamseyParams ramsey;
    SenseForwardParams sense_forward;
    SenseInvertParams sense_invert;
    BudgetParams budget;
    ClassicalRunParams classical;
};

// Strict parser: unknown keys anywhere are a ConfigError; physical
// quantities carry unit suffixes in the file (lambda0_nm, tau_s, ...).
RunConfig parse_run_config(const json& j);
json run_config_to_json(const RunConfig& cfg);

} // namespace rotor
