#include "rotor/io.hpp"
#include "rotor/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <istream>
#include <ostream>
#include <sstream>

namespace rotor {

namespace {

// Strict-schema guard: every object key must be in the allowed list.
void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* key : allowed)
            if (item.key() == key) {
                ok = true;
                break;
            }
        if (!ok) throw ConfigError(where + ": unknown key '" + item.key() + "'");
    }
}

double get_num(const json& j, const std::string& where, const char* key) {
    if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    if (!j.at(key).is_number()) throw ConfigError(where + ": key '" + key + "' must be a number");
    return j.at(key).get<double>();
}

double get_num_or(const json& j, const std::string& where, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ConfigError(where + ": key '" + key + "' must be a number");
    return j.at(key).get<double>();
}

int get_int_or(const json& j, const std::string& where, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer()) throw ConfigError(where + ": key '" + key + "' must be an integer");
    return j.at(key).get<int>();
}

std::string get_str_or(const json& j, const std::string& where, const char* key,
                       const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_string()) throw ConfigError(where + ": key '" + key + "' must be a string");
    return j.at(key).get<std::string>();
}

bool get_bool_or(const json& j, const std::string& where, const char* key, bool fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_boolean()) throw ConfigError(where + ": key '" + key + "' must be a boolean");
    return j.at(key).get<bool>();
}

template <size_t N>
std::array<double, N> get_vec(const json& j, const std::string& where, const char* key,
                              const std::array<double, N>& fallback) {
    if (!j.contains(key)) return fallback;
    const json& arr = j.at(key);
    if (!arr.is_array() || arr.size() != N)
        throw ConfigError(where + ": key '" + std::string(key) + "' must be an array of " +
                          std::to_string(N) + " numbers");
    std::array<double, N> out{};
    for (size_t i = 0; i < N; ++i) {
        if (!arr[i].is_number()) throw ConfigError(where + ": key '" + key + "' must hold numbers");
        out[i] = arr[i].get<double>();
    }
    return out;
}

std::string iso_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

void require_version(const json& j, const std::string& where, const char* format_name) {
    if (get_str_or(j, where, "format", "") != format_name)
        throw ConfigError(where + ": expected format '" + format_name + "'");
    const int version = get_int_or(j, where, "version", -1);
    if (version != 1) throw ConfigError(where + ": unsupported version");
}

const char* kPlaneNames[3] = {"xy", "yz", "zx"};

} // namespace

std::string resolve_output_path(const std::string& path) {
    if (path.empty()) return path;
    const char* dir = std::getenv("ROTOR_OUT_DIR");
    if (dir == nullptr || *dir == '\0') return path;
    std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (std::filesystem::path(dir) / p).string();
}

void write_table(std::ostream& os, const std::vector<std::string>& comments,
                 const std::vector<std::string>& columns,
                 const std::vector<std::vector<double>>& rows, bool timestamp_header) {
    if (timestamp_header) os << "# generated: " << iso_timestamp() << "\n";
    for (const std::string& c : comments) os << "# " << c << "\n";
    for (size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << "\n";
    for (const auto& row : rows) {
        if (row.size() != columns.size())
            throw ConfigError("write_table: row width does not match the column list");
        for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << fmt(row[i]);
        os << "\n";
    }
}

json atom_to_json(const AtomSpec& atom) {
    return json{{"name", atom.name},
                {"mass_u", atom.mass_kg / kAmu},
                {"nuclear_spin_I", atom.nuclear_spin_I},
                {"total_F", atom.total_F},
                {"g_factor", atom.g_factor},
                {"resonance_lambda_nm", atom.resonance_lambda_m * 1e9}};
}

AtomSpec atom_from_json(const json& j) {
    check_keys(j, "atom",
               {"name", "mass_u", "nuclear_spin_I", "total_F", "g_factor", "resonance_lambda_nm"});
    AtomSpec atom;
    atom.name = get_str_or(j, "atom", "name", "custom");
    atom.mass_kg = get_num(j, "atom", "mass_u") * kAmu;
    atom.nuclear_spin_I = get_num(j, "atom", "nuclear_spin_I");
    atom.total_F = get_num(j, "atom", "total_F");
    atom.g_factor = get_num_or(j, "atom", "g_factor", kGElectron);
    atom.resonance_lambda_m = get_num_or(j, "atom", "resonance_lambda_nm", 0.0) * 1e-9;
    return atom;
}

json lattice_to_json(const LatticeSpec& spec) {
    return json{{"lambda0_nm", spec.lambda0 * 1e9},
                {"V0_E0", spec.V0},
                {"B0_E0", spec.B0},
                {"beta_mix", spec.beta_mix},
                {"nuclear_spin_I", spec.nuclear_spin_I},
                {"detuning_Delta_rad_s", spec.detuning_Delta},
                {"gamma_e_rad_s", spec.gamma_e}};
}

LatticeSpec lattice_from_json(const json& j) {
    check_keys(j, "lattice",
               {"lambda0_nm", "V0_E0", "B0_E0", "beta_mix", "nuclear_spin_I",
                "detuning_Delta_rad_s", "gamma_e_rad_s"});
    LatticeSpec spec;
    spec.lambda0 = get_num(j, "lattice", "lambda0_nm") * 1e-9;
    spec.V0 = get_num(j, "lattice", "V0_E0");
    spec.B0 = get_num(j, "lattice", "B0_E0");
    spec.beta_mix = get_num_or(j, "lattice", "beta_mix", spec.beta_mix);
    spec.nuclear_spin_I = get_num(j, "lattice", "nuclear_spin_I");
    spec.detuning_Delta = get_num_or(j, "lattice", "detuning_Delta_rad_s", 0.0);
    spec.gamma_e = get_num_or(j, "lattice", "gamma_e_rad_s", 0.0);
    validate(spec);
    return spec;
}

json spectrum_to_json(const SpectrumResult& result) {
    json levels = json::array();
    for (const RadialLevel& lvl : result.levels) {
        const OverlapIntegrals ov = overlap_integrals(result, lvl.n, lvl.zeta);
        levels.push_back(json{{"n", lvl.n},
                              {"zeta", lvl.zeta},
                              {"energy_E0", lvl.energy},
                              {"beta_z", ov.beta_z},
                              {"beta_par", ov.beta_par},
                              {"rho_par_lambda0", ov.rho_par},
                              {"psi_up", lvl.psi_up},
                              {"psi_down", lvl.psi_down}});
    }
    return json{{"format", "rotor-spectrum"},
                {"version", 1},
                {"lattice", lattice_to_json(result.spec)},
                {"grid", json{{"r_max_lambda0", result.grid.r_max}, {"n_points", result.grid.n_points}}},
                {"grid_error_estimate_E0", result.grid_error_estimate},
                {"levels", levels}};
}

SpectrumResult spectrum_from_json(const json& j) {
    require_version(j, "spectrum document", "rotor-spectrum");
    check_keys(j, "spectrum document",
               {"format", "version", "lattice", "grid", "grid_error_estimate_E0", "levels"});
    SpectrumResult result;
    result.spec = lattice_from_json(j.at("lattice"));
    const json& grid = j.at("grid");
    check_keys(grid, "spectrum grid", {"r_max_lambda0", "n_points"});
    result.grid.r_max = get_num(grid, "spectrum grid", "r_max_lambda0");
    result.grid.n_points = get_int_or(grid, "spectrum grid", "n_points", 0);
    result.grid_error_estimate = get_num_or(j, "spectrum document", "grid_error_estimate_E0", 0.0);
    if (!j.contains("levels") || !j.at("levels").is_array())
        throw ConfigError("spectrum document: missing levels array");
    for (const json& lj : j.at("levels")) {
        check_keys(lj, "spectrum level",
                   {"n", "zeta", "energy_E0", "beta_z", "beta_par", "rho_par_lambda0", "psi_up",
                    "psi_down"});
        RadialLevel lvl;
        lvl.n = get_int_or(lj, "spectrum level", "n", 0);
        lvl.zeta = get_num(lj, "spectrum level", "zeta");
        lvl.energy = get_num(lj, "spectrum level", "energy_E0");
        lvl.psi_up = lj.at("psi_up").get<std::vector<double>>();
        lvl.psi_down = lj.at("psi_down").get<std::vector<double>>();
        result.levels.push_back(std::move(lvl));
    }
    return result;
}

json calibration_to_json(const CalibrationTable& cal) {
    auto point = [](const CalibrationPoint& p) {
        return json{{"beta_z_half", p.beta_z_half},
                    {"beta_z_3half", p.beta_z_3half},
                    {"beta_z_5half", p.beta_z_5half},
                    {"beta_par_half", p.beta_par_half},
                    {"rho_par_half_lambda0", p.rho_par_half}};
    };
    return json{{"format", "rotor-calibration"},
                {"version", 1},
                {"atom", atom_to_json(cal.atom)},
                {"lambda0_nm", cal.lambda0 * 1e9},
                {"script_n_5", point(cal.n5)},
                {"script_n_10", point(cal.n10)},
                {"beta_log_derivative", cal.beta_log_derivative},
                {"rho_log_derivative", cal.rho_log_derivative}};
}

CalibrationTable calibration_from_json(const json& j) {
    require_version(j, "calibration", "rotor-calibration");
    check_keys(j, "calibration",
               {"format", "version", "atom", "lambda0_nm", "script_n_5", "script_n_10",
                "beta_log_derivative", "rho_log_derivative"});
    CalibrationTable cal;
    cal.atom = atom_from_json(j.at("atom"));
    cal.lambda0 = get_num(j, "calibration", "lambda0_nm") * 1e-9;
    auto point = [](const json& pj, const char* where) {
        check_keys(pj, where,
                   {"beta_z_half", "beta_z_3half", "beta_z_5half", "beta_par_half",
                    "rho_par_half_lambda0"});
        CalibrationPoint p;
        p.beta_z_half = get_num(pj, where, "beta_z_half");
        p.beta_z_3half = get_num(pj, where, "beta_z_3half");
        p.beta_z_5half = get_num(pj, where, "beta_z_5half");
        p.beta_par_half = get_num(pj, where, "beta_par_half");
        p.rho_par_half = get_num(pj, where, "rho_par_half_lambda0");
        return p;
    };
    cal.n5 = point(j.at("script_n_5"), "calibration point 5");
    cal.n10 = point(j.at("script_n_10"), "calibration point 10");
    cal.beta_log_derivative = get_num_or(j, "calibration", "beta_log_derivative", 0.0);
    cal.rho_log_derivative = get_num_or(j, "calibration", "rho_log_derivative", 0.0);
    return cal;
}

json frame_to_json(const FrameState& frame) {
    return json{{"format", "rotor-frame"},
                {"version", 1},
                {"B_ex_T", frame.B_ex},
                {"Omega_rad_s", frame.Omega},
                {"accel_m_s2", frame.accel}};
}

FrameState frame_from_json(const json& j) {
    require_version(j, "frame", "rotor-frame");
    check_keys(j, "frame", {"format", "version", "B_ex_T", "Omega_rad_s", "accel_m_s2"});
    FrameState frame;
    frame.B_ex = get_vec<3>(j, "frame", "B_ex_T", frame.B_ex);
    frame.Omega = get_vec<3>(j, "frame", "Omega_rad_s", frame.Omega);
    frame.accel = get_vec<3>(j, "frame", "accel_m_s2", frame.accel);
    return frame;
}

json budgets_to_json(const AccuracyBudget& acc, const ShotNoiseBudget& shot) {
    return json{{"format", "rotor-budget"},
                {"version", 1},
                {"accuracy",
                 json{{"omega_laser_rad_s", acc.omega_laser},
                      {"delta_omega_rad_s", acc.delta_omega},
                      {"beta_log_derivative", acc.beta_log_derivative},
                      {"rho_log_derivative", acc.rho_log_derivative},
                      {"delta_B_over_B", acc.delta_B_over_B},
                      {"delta_a_over_a", acc.delta_a_over_a},
                      {"gyro_radiative_coeff_s2", acc.gyro_radiative_coeff},
                      {"delta_Omega_earth_rad_s", acc.delta_Omega_earth},
                      {"delta_B_u_over_B", acc.delta_B_u_over_B},
                      {"delta_Omega_u_per_Omega32", acc.delta_Omega_u_per_Omega32},
                      {"delta_a_u_over_a", acc.delta_a_u_over_a}}},
                {"shot_noise",
                 json{{"delta_phi_rad", shot.delta_phi},
                      {"delta_DeltaQR_rad_s", shot.delta_DeltaQR},
                      {"delta_B_T", shot.delta_B},
                      {"delta_Omega_rad_s", shot.delta_Omega},
                      {"delta_a_m_s2", shot.delta_a}}}};
}

void write_measurements_csv(std::ostream& os, const MeasurementSet& meas, bool timestamp_header) {
    if (timestamp_header) os << "# generated: " << iso_timestamp() << "\n";
    os << "# script_n 0 denotes the combined splitting Delta0 (measured at script_n = 10)\n";
    os << "plane,script_n,delta_rad_s\n";
    for (int p = 0; p < 3; ++p) os << kPlaneNames[p] << ",0," << fmt(meas.delta0[p]) << "\n";
    for (int p = 0; p < 3; ++p) os << kPlaneNames[p] << ",5," << fmt(meas.delta1_n5[p]) << "\n";
    for (int p = 0; p < 3; ++p) os << kPlaneNames[p] << ",10," << fmt(meas.delta1_n10[p]) << "\n";
}

MeasurementSet read_measurements_csv(std::istream& is) {
    MeasurementSet meas;
    bool seen[9] = {false};
    bool header_done = false;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_done) {
            if (line != "plane,script_n,delta_rad_s")
                throw ConfigError("measurement CSV: expected header 'plane,script_n,delta_rad_s'");
            header_done = true;
            continue;
        }
        std::istringstream ss(line);
        std::string plane, script, value;
        if (!std::getline(ss, plane, ',') || !std::getline(ss, script, ',') ||
            !std::getline(ss, value))
            throw ConfigError("measurement CSV: malformed row '" + line + "'");
        int p = -1;
        for (int i = 0; i < 3; ++i)
            if (plane == kPlaneNames[i]) p = i;
        if (p < 0) throw ConfigError("measurement CSV: unknown plane '" + plane + "'");
        int slot;
        if (script == "0")
            slot = 0;
        else if (script == "5")
            slot = 1;
        else if (script == "10")
            slot = 2;
        else
            throw ConfigError("measurement CSV: script_n must be 0, 5 or 10, got '" + script + "'");
        double delta = 0.0;
        try {
            delta = std::stod(value);
        } catch (const std::exception&) {
            throw ConfigError("measurement CSV: bad delta value '" + value + "'");
        }
        const int idx = slot * 3 + p;
        if (seen[idx]) throw ConfigError("measurement CSV: duplicate row for plane " + plane);
        seen[idx] = true;
        if (slot == 0)
            meas.delta0[p] = delta;
        else if (slot == 1)
            meas.delta1_n5[p] = delta;
        else
            meas.delta1_n10[p] = delta;
    }
    for (bool s : seen)
        if (!s) throw ConfigError("measurement CSV: nine rows required (3 planes x script_n 0/5/10)");
    return meas;
}

std::string command_name(Command c) {
    switch (c) {
        case Command::Field: return "field";
        case Command::Spectrum: return "spectrum";
        case Command::Density: return "density";
        case Command::Raman: return "raman";
        case Command::Ramsey: return "ramsey";
        case Command::SenseForward: return "sense-forward";
        case Command::SenseInvert: return "sense-invert";
        case Command::Budget: return "budget";
        case Command::Classical: return "classical";
    }
    throw ConfigError("command_name: invalid command");
}

Command command_from_name(const std::string& name) {
    for (Command c : {Command::Field, Command::Spectrum, Command::Density, Command::Raman,
                      Command::Ramsey, Command::SenseForward, Command::SenseInvert, Command::Budget,
                      Command::Classical})
        if (command_name(c) == name) return c;
    throw ConfigError("run config: unknown command '" + name + "'");
}

namespace {

RadialGrid grid_from_params(const json& p, const std::string& where) {
    RadialGrid grid;
    grid.r_max = get_num_or(p, where, "r_max_lambda0", grid.r_max);
    grid.n_points = get_int_or(p, where, "n_points", grid.n_points);
    return grid;
}

void grid_to_params(json& p, const RadialGrid& grid) {
    p["r_max_lambda0"] = grid.r_max;
    p["n_points"] = grid.n_points;
}

} // namespace

RunConfig parse_run_config(const json& j) {
    require_version(j, "run config", "rotor-run");
    check_keys(j, "run config",
               {"format", "version", "command", "atom", "lattice", "output_path", "output_format",
                "params"});
    RunConfig cfg;
    cfg.command = command_from_name(get_str_or(j, "run config", "command", ""));
    if (!j.contains("atom")) throw ConfigError("run config: missing 'atom'");
    if (j.at("atom").is_string()) {
        cfg.atom_name = j.at("atom").get<std::string>();
        cfg.atom = find_atom(cfg.atom_name);
    } else {
        cfg.atom_name.clear();
        cfg.atom = atom_from_json(j.at("atom"));
    }
    if (!j.contains("lattice")) throw ConfigError("run config: missing 'lattice'");
    cfg.lattice = lattice_from_json(j.at("lattice"));
    cfg.output_path = get_str_or(j, "run config", "output_path", "");
    cfg.output_format = get_str_or(j, "run config", "output_format", "csv");
    if (cfg.output_format != "csv" && cfg.output_format != "json")
        throw ConfigError("run config: output_format must be 'csv' or 'json'");

    const json params = j.contains("params") ? j.at("params") : json::object();
    const std::string where = "params (" + command_name(cfg.command) + ")";
    switch (cfg.command) {
        case Command::Field: {
            check_keys(params, where, {"r_min_lambda0", "r_max_lambda0", "n_r", "n_phi"});
            cfg.field.r_min = get_num_or(params, where, "r_min_lambda0", cfg.field.r_min);
            cfg.field.r_max = get_num_or(params, where, "r_max_lambda0", cfg.field.r_max);
            cfg.field.n_r = get_int_or(params, where, "n_r", cfg.field.n_r);
            cfg.field.n_phi = get_int_or(params, where, "n_phi", cfg.field.n_phi);
            break;
        }
        case Command::Spectrum: {
            check_keys(params, where, {"n_max", "zeta_max", "r_max_lambda0", "n_points"});
            cfg.spectrum.n_max = get_int_or(params, where, "n_max", cfg.spectrum.n_max);
            cfg.spectrum.zeta_max = get_num_or(params, where, "zeta_max", cfg.spectrum.zeta_max);
            cfg.spectrum.grid = grid_from_params(params, where);
            break;
        }
        case Command::Density: {
            check_keys(params, where,
                       {"n_max", "zeta_max", "r_max_lambda0", "n_points", "level_n", "level_zeta",
                        "n_samples"});
            cfg.density.spectrum.n_max = get_int_or(params, where, "n_max", cfg.density.spectrum.n_max);
            cfg.density.spectrum.zeta_max =
                get_num_or(params, where, "zeta_max", cfg.density.spectrum.zeta_max);
            cfg.density.spectrum.grid = grid_from_params(params, where);
            cfg.density.level_n = get_int_or(params, where, "level_n", cfg.density.level_n);
            cfg.density.level_zeta = get_num_or(params, where, "level_zeta", cfg.density.level_zeta);
            cfg.density.n_samples = get_int_or(params, where, "n_samples", cfg.density.n_samples);
            break;
        }
        case Command::Raman: {
            check_keys(params, where, {"omega_g_rad_s", "delta_rad_s", "gamma_rad_s", "t_max_s", "n_t"});
            cfg.raman.cfg.omega_g = get_num_or(params, where, "omega_g_rad_s", 0.0);
            cfg.raman.cfg.delta = get_num_or(params, where, "delta_rad_s", 0.0);
            cfg.raman.cfg.gamma = get_num_or(params, where, "gamma_rad_s", 0.0);
            cfg.raman.t_max = get_num_or(params, where, "t_max_s", cfg.raman.t_max);
            cfg.raman.n_t = get_int_or(params, where, "n_t", cfg.raman.n_t);
            break;
        }
        case Command::Ramsey: {
            check_keys(params, where,
                       {"omega_g_rad_s", "gamma_rad_s", "tau_p_s", "T_delay_s", "delta_min_rad_s",
                        "delta_max_rad_s", "n_delta"});
            cfg.ramsey.cfg.omega_g = get_num_or(params, where, "omega_g_rad_s", 0.0);
            cfg.ramsey.cfg.gamma = get_num_or(params, where, "gamma_rad_s", 0.0);
            cfg.ramsey.cfg.tau_p = get_num_or(params, where, "tau_p_s", 0.0);
            cfg.ramsey.cfg.T_delay = get_num_or(params, where, "T_delay_s", 0.0);
            cfg.ramsey.delta_min = get_num_or(params, where, "delta_min_rad_s", 0.0);
            cfg.ramsey.delta_max = get_num_or(params, where, "delta_max_rad_s", 0.0);
            cfg.ramsey.n_delta = get_int_or(params, where, "n_delta", cfg.ramsey.n_delta);
            break;
        }
        case Command::SenseForward: {
            check_keys(params, where,
                       {"B_ex_T", "Omega_rad_s", "accel_m_s2", "calibration_path", "calibration_out",
                        "r_max_lambda0", "n_points"});
            cfg.sense_forward.frame.B_ex = get_vec<3>(params, where, "B_ex_T", {0.0, 0.0, 0.0});
            cfg.sense_forward.frame.Omega = get_vec<3>(params, where, "Omega_rad_s", {0.0, 0.0, 0.0});
            cfg.sense_forward.frame.accel = get_vec<3>(params, where, "accel_m_s2", {0.0, 0.0, 0.0});
            cfg.sense_forward.calibration_path = get_str_or(params, where, "calibration_path", "");
            cfg.sense_forward.calibration_out = get_str_or(params, where, "calibration_out", "");
            cfg.sense_forward.grid = grid_from_params(params, where);
            break;
        }
        case Command::SenseInvert: {
            check_keys(params, where,
                       {"measurements_path", "calibration_path", "r_max_lambda0", "n_points"});
            cfg.sense_invert.measurements_path = get_str_or(params, where, "measurements_path", "");
            cfg.sense_invert.calibration_path = get_str_or(params, where, "calibration_path", "");
            cfg.sense_invert.grid = grid_from_params(params, where);
            if (cfg.sense_invert.measurements_path.empty())
                throw ConfigError(where + ": measurements_path is required");
            break;
        }
        case Command::Budget: {
            check_keys(params, where,
                       {"delta_omega_rad_s", "N_rotors", "T_meas_s", "N_p", "N_s", "tau_s",
                        "beta_sensitivity", "rho_sensitivity", "calibration_path", "r_max_lambda0",
                        "n_points"});
            cfg.budget.delta_omega = get_num_or(params, where, "delta_omega_rad_s", 0.0);
            cfg.budget.N_rotors = get_num_or(params, where, "N_rotors", cfg.budget.N_rotors);
            cfg.budget.T_meas = get_num_or(params, where, "T_meas_s", cfg.budget.T_meas);
            cfg.budget.N_p = get_num_or(params, where, "N_p", 0.0);
            cfg.budget.N_s = get_num_or(params, where, "N_s", 0.0);
            cfg.budget.tau = get_num_or(params, where, "tau_s", 0.0);
            cfg.budget.beta_sensitivity = get_num_or(params, where, "beta_sensitivity", 0.0);
            cfg.budget.rho_sensitivity = get_num_or(params, where, "rho_sensitivity", 0.0);
            cfg.budget.calibration_path = get_str_or(params, where, "calibration_path", "");
            cfg.budget.grid = grid_from_params(params, where);
            break;
        }
        case Command::Classical: {
            check_keys(params, where,
                       {"r0_b0", "p0_hbar_b0", "f0", "ds_reduced", "s_end_reduced", "store_every",
                        "full_bessel", "mode"});
            cfg.classical.init.r = get_vec<2>(params, where, "r0_b0", {0.0, 0.0});
            cfg.classical.init.p = get_vec<2>(params, where, "p0_hbar_b0", {0.0, 0.0});
            cfg.classical.init.f = get_vec<3>(params, where, "f0", {0.0, 0.0, 1.0});
            cfg.classical.ds = get_num_or(params, where, "ds_reduced", cfg.classical.ds);
            cfg.classical.s_end = get_num_or(params, where, "s_end_reduced", cfg.classical.s_end);
            cfg.classical.store_every = get_int_or(params, where, "store_every", cfg.classical.store_every);
            cfg.classical.full_bessel = get_bool_or(params, where, "full_bessel", false);
            cfg.classical.mode = get_str_or(params, where, "mode", cfg.classical.mode);
            if (cfg.classical.mode != "trajectory" && cfg.classical.mode != "rings")
                throw ConfigError(where + ": mode must be 'trajectory' or 'rings'");
            break;
        }
    }
    return cfg;
}

json run_config_to_json(const RunConfig& cfg) {
    json j{{"format", "rotor-run"}, {"version", 1}, {"command", command_name(cfg.command)}};
    if (!cfg.atom_name.empty())
        j["atom"] = cfg.atom_name;
    else
        j["atom"] = atom_to_json(cfg.atom);
    j["lattice"] = lattice_to_json(cfg.lattice);
    j["output_path"] = cfg.output_path;
    j["output_format"] = cfg.output_format;

    json p = json::object();
    switch (cfg.command) {
        case Command::Field:
            p["r_min_lambda0"] = cfg.field.r_min;
            p["r_max_lambda0"] = cfg.field.r_max;
            p["n_r"] = cfg.field.n_r;
            p["n_phi"] = cfg.field.n_phi;
            break;
        case Command::Spectrum:
            p["n_max"] = cfg.spectrum.n_max;
            p["zeta_max"] = cfg.spectrum.zeta_max;
            grid_to_params(p, cfg.spectrum.grid);
            break;
        case Command::Density:
            p["n_max"] = cfg.density.spectrum.n_max;
            p["zeta_max"] = cfg.density.spectrum.zeta_max;
            grid_to_params(p, cfg.density.spectrum.grid);
            p["level_n"] = cfg.density.level_n;
            p["level_zeta"] = cfg.density.level_zeta;
            p["n_samples"] = cfg.density.n_samples;
            break;
        case Command::Raman:
            p["omega_g_rad_s"] = cfg.raman.cfg.omega_g;
            p["delta_rad_s"] = cfg.raman.cfg.delta;
            p["gamma_rad_s"] = cfg.raman.cfg.gamma;
            p["t_max_s"] = cfg.raman.t_max;
            p["n_t"] = cfg.raman.n_t;
            break;
        case Command::Ramsey:
            p["omega_g_rad_s"] = cfg.ramsey.cfg.omega_g;
            p["gamma_rad_s"] = cfg.ramsey.cfg.gamma;
            p["tau_p_s"] = cfg.ramsey.cfg.tau_p;
            p["T_delay_s"] = cfg.ramsey.cfg.T_delay;
            p["delta_min_rad_s"] = cfg.ramsey.delta_min;
            p["delta_max_rad_s"] = cfg.ramsey.delta_max;
            p["n_delta"] = cfg.ramsey.n_delta;
            break;
        case Command::SenseForward:
            p["B_ex_T"] = cfg.sense_forward.frame.B_ex;
            p["Omega_rad_s"] = cfg.sense_forward.frame.Omega;
            p["accel_m_s2"] = cfg.sense_forward.frame.accel;
            p["calibration_path"] = cfg.sense_forward.calibration_path;
            p["calibration_out"] = cfg.sense_forward.calibration_out;
            grid_to_params(p, cfg.sense_forward.grid);
            break;
        case Command::SenseInvert:
            p["measurements_path"] = cfg.sense_invert.measurements_path;
            p["calibration_path"] = cfg.sense_invert.calibration_path;
            grid_to_params(p, cfg.sense_invert.grid);
            break;
        case Command::Budget:
            p["delta_omega_rad_s"] = cfg.budget.delta_omega;
            p["N_rotors"] = cfg.budget.N_rotors;
            p["T_meas_s"] = cfg.budget.T_meas;
            p["N_p"] = cfg.budget.N_p;
            p["N_s"] = cfg.budget.N_s;
            p["tau_s"] = cfg.budget.tau;
            p["beta_sensitivity"] = cfg.budget.beta_sensitivity;
            p["rho_sensitivity"] = cfg.budget.rho_sensitivity;
            p["calibration_path"] = cfg.budget.calibration_path;
            grid_to_params(p, cfg.budget.grid);
            break;
        case Command::Classical:
            p["r0_b0"] = cfg.classical.init.r;
            p["p0_hbar_b0"] = cfg.classical.init.p;
            p["f0"] = cfg.classical.init.f;
            p["ds_reduced"] = cfg.classical.ds;
            p["s_end_reduced"] = cfg.classical.s_end;
            p["store_every"] = cfg.classical.store_every;
            p["full_bessel"] = cfg.classical.full_bessel;
            p["mode"] = cfg.classical.mode;
            break;
    }
    j["params"] = p;
    return j;
}

} // namespace rotor
