// Batch front-end for the rotor toolkit: every pipeline stage as a
// subcommand reading a JSON config with flag overrides.
#include "rotor/classical.hpp"
#include "rotor/constants.hpp"
#include "rotor/errors.hpp"
#include "rotor/field.hpp"
#include "rotor/io.hpp"
#include "rotor/raman.hpp"
#include "rotor/sensing.hpp"
#include "rotor/spectrum.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using rotor::Command;
using rotor::ConfigError;
using rotor::RunConfig;
using json = rotor::json;

RunConfig base_config(Command command) {
    RunConfig cfg;
    cfg.command = command;
    cfg.atom_name = "6Li";
    cfg.atom = rotor::find_atom(cfg.atom_name);
    cfg.lattice.lambda0 = 670.8e-9;
    cfg.lattice.V0 = 100.0;
    cfg.lattice.B0 = 180.0;
    cfg.lattice.nuclear_spin_I = 1.0;
    return cfg;
}

void apply_preset(RunConfig& cfg, const std::string& name) {
    if (name == "li6-paper") {
        cfg.atom_name = "6Li";
        cfg.atom = rotor::find_atom("6Li");
        cfg.lattice.lambda0 = 670.8e-9;
        cfg.lattice.V0 = 100.0;
        cfg.lattice.B0 = 180.0;
        cfg.lattice.nuclear_spin_I = 1.0;
        cfg.budget.delta_omega = 2.0 * rotor::kPi * 0.160;
        cfg.budget.N_rotors = 4.99e8;
        cfg.budget.T_meas = 1.0;
        cfg.budget.N_p = 7.467e24;
        cfg.budget.N_s = 2.987e25;
        cfg.budget.tau = 1.644e-3;
        cfg.budget.beta_sensitivity = 0.075495 / 2.0;
        cfg.budget.rho_sensitivity = 0.139986;
        cfg.raman.cfg.omega_g = 1000.0;
        cfg.raman.cfg.gamma = 50.0;
        cfg.raman.n_t = 400;
        cfg.ramsey.cfg.omega_g = 1000.0;
        cfg.ramsey.cfg.gamma = 50.0;
        cfg.ramsey.cfg.tau_p = rotor::kPi / 2.0 / 1000.0;
        cfg.ramsey.cfg.T_delay = 0.05;
        cfg.ramsey.delta_min = -500.0;
        cfg.ramsey.delta_max = 500.0;
        cfg.ramsey.n_delta = 401;
    } else if (name == "k40-classical") {
        cfg.atom_name = "40K";
        cfg.atom = rotor::find_atom("40K");
        cfg.lattice.lambda0 = 766.5e-9;
        cfg.lattice.V0 = 100.0;
        cfg.lattice.B0 = 180.0;
        cfg.lattice.nuclear_spin_I = 4.0;
        cfg.classical.init.r = {5.0, 0.0};
        cfg.classical.init.p = {0.0, -3.0};
        cfg.classical.init.f = {-0.9975, 0.05, 0.05};
        cfg.classical.ds = 5e-4;
        cfg.classical.s_end = 400.0;
        cfg.classical.store_every = 100;
    } else {
        throw ConfigError("unknown preset '" + name + "' (have: li6-paper, k40-classical)");
    }
}

json rows_to_json(const std::vector<std::string>& columns,
                  const std::vector<std::vector<double>>& rows) {
    json arr = json::array();
    for (const auto& row : rows) {
        json obj;
        for (size_t i = 0; i < columns.size(); ++i) obj[columns[i]] = row[i];
        arr.push_back(obj);
    }
    return arr;
}

// Writes either CSV or a JSON row array, honoring the output format.
void emit_rows(std::ostream& os, const RunConfig& cfg, const std::vector<std::string>& comments,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows, bool timestamp) {
    if (cfg.output_format == "json") {
        json doc{{"format", "rotor-table"}, {"version", 1}, {"command", command_name(cfg.command)}};
        for (const std::string& c : comments) doc["notes"].push_back(c);
        doc["rows"] = rows_to_json(columns, rows);
        os << doc.dump(2) << "\n";
    } else {
        rotor::write_table(os, comments, columns, rows, timestamp);
    }
}

struct OutputStream {
    std::ofstream file;
    std::ostream* os = nullptr;

    explicit OutputStream(const std::string& path) {
        if (path.empty()) {
            os = &std::cout;
            return;
        }
        const std::string resolved = rotor::resolve_output_path(path);
        file.open(resolved);
        if (!file) throw ConfigError("cannot open output file '" + resolved + "'");
        os = &file;
    }
};

rotor::CalibrationTable obtain_calibration(const std::string& path, const RunConfig& cfg,
                                           const rotor::RadialGrid& grid, bool need_sens) {
    if (!path.empty()) {
        std::ifstream in(rotor::resolve_output_path(path));
        if (!in) throw ConfigError("cannot open calibration file '" + path + "'");
        json j;
        in >> j;
        return rotor::calibration_from_json(j);
    }
    return rotor::make_calibration(cfg.atom, cfg.lattice.lambda0, grid, need_sens);
}

void run_field(const RunConfig& cfg, std::ostream& os, bool timestamp) {
    const rotor::FieldParams& p = cfg.field;
    if (p.n_r < 1 || p.n_phi < 1) throw ConfigError("field: n_r and n_phi must be positive");
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < p.n_r; ++i) {
        const double r =
            (p.n_r == 1) ? p.r_min : p.r_min + (p.r_max - p.r_min) * i / double(p.n_r - 1);
        for (int jj = 0; jj < p.n_phi; ++jj) {
            const double phi = 2.0 * rotor::kPi * jj / double(p.n_phi);
            const rotor::FieldSample s = rotor::sample_field(cfg.lattice, r, phi);
            rows.push_back({s.r, s.phi, s.V, s.B_r, s.B_phi});
        }
    }
    emit_rows(os, cfg, {"potential and fictitious field, E0 units, lengths in lambda0"},
              {"r_lambda0", "phi_rad", "V_E0", "B_r_E0", "B_phi_E0"}, rows, timestamp);
}

void run_spectrum(const RunConfig& cfg, std::ostream& os, bool timestamp) {
    const rotor::SpectrumResult result = rotor::solve_spectrum(
        cfg.lattice, cfg.spectrum.n_max, cfg.spectrum.zeta_max, cfg.spectrum.grid);
    if (cfg.output_format == "json") {
        os << rotor::spectrum_to_json(result).dump(2) << "\n";
        return;
    }
    std::vector<std::vector<double>> rows;
    for (const rotor::RadialLevel& lvl : result.levels) {
        const rotor::OverlapIntegrals ov = rotor::overlap_integrals(result, lvl.n, lvl.zeta);
        rows.push_back({double(lvl.n), lvl.zeta, lvl.energy, ov.beta_z, ov.beta_par, ov.rho_par});
    }
    std::ostringstream note;
    note << "grid_error_estimate_E0 = " << result.grid_error_estimate;
    rotor::write_table(os, {"radial levels, energies in E0", note.str()},
                       {"n", "zeta", "energy_E0", "beta_z", "beta_par", "rho_par_lambda0"}, rows,
                       timestamp);
}

void run_density(const RunConfig& cfg, std::ostream& os, bool timestamp) {
    const rotor::DensityParams& p = cfg.density;
    const rotor::SpectrumResult result = rotor::solve_spectrum(
        cfg.lattice, p.spectrum.n_max, p.spectrum.zeta_max, p.spectrum.grid);
    if (p.n_samples < 2) throw ConfigError("density: n_samples must be at least 2");
    std::vector<std::vector<double>> rows;
    for (int k = 0; k < p.n_samples; ++k) {
        const double r = result.grid.r_max * (k + 1) / double(p.n_samples + 1);
        rows.push_back({r, rotor::areal_density(result, p.level_n, p.level_zeta, r)});
    }
    std::ostringstream note;
    note << "peak_radius_lambda0 = " << rotor::density_peak_radius(result, p.level_n, p.level_zeta);
    emit_rows(os, cfg, {"areal density of level (n, zeta), 1/lambda0^2 units", note.str()},
              {"r_lambda0", "density"}, rows, timestamp);
}

void run_raman(const RunConfig& cfg, std::ostream& os, bool timestamp) {
    const rotor::RamanParams& p = cfg.raman;
    double t_max = p.t_max;
    if (t_max <= 0.0) {
        const double omega = std::hypot(p.cfg.delta, p.cfg.omega_g);
        if (omega <= 0.0) throw ConfigError("raman: t_max_s required when omega_g = delta = 0");
        t_max = 10.0 * 2.0 * rotor::kPi / omega;
    }
    if (p.n_t < 2) throw ConfigError("raman: n_t must be at least 2");
    std::vector<std::vector<double>> rows;
    for (int k = 0; k < p.n_t; ++k) {
        const double t = t_max * k / double(p.n_t - 1);
        const rotor::RabiProbabilities pr = rotor::rabi_probabilities(p.cfg, t);
        rows.push_back({t, pr.P_up, pr.P_down});
    }
    emit_rows(os, cfg, {"two-level Raman populations from the up state"},
              {"t_s", "P_up", "P_down"}, rows, timestamp);
}

void run_ramsey(const RunConfig& cfg, std::ostream& os, bool timestamp) {
    const rotor::RamseyParams& p = cfg.ramsey;
    double lo = p.delta_min, hi = p.delta_max;
    if (lo == 0.0 && hi == 0.0) {
        if (p.cfg.T_delay <= 0.0) throw ConfigError("ramsey: detuning range required");
        hi = 4.0 * rotor::kPi / p.cfg.T_delay;
        lo = -hi;
    }
    if (!(hi > lo) || p.n_delta < 3) throw ConfigError("ramsey: need delta_max > delta_min, n_delta >= 3");
    std::vector<double> deltas(p.n_delta);
    for (int k = 0; k < p.n_delta; ++k) deltas[k] = lo + (hi - lo) * k / double(p.n_delta - 1);
    const std::vector<rotor::FringePoint> fringe = rotor::ramsey_scan(p.cfg, deltas);

    std::vector<std::string> comments = {"Ramsey fringe: transferred population vs detuning"};
    try {
        std::ostringstream note;
        note << "resonance_estimate_rad_s = " << rotor::resonance_estimate(fringe);
        comments.push_back(note.str());
    } catch (const rotor::MeasurementError&) {
        comments.push_back("resonance_estimate_rad_s = n/a (no interior maximum)");
    }
    std::vector<std::vector<double>> rows;
    for (const rotor::FringePoint& f : fringe) rows.push_back({f.delta, f.probability});
    emit_rows(os, cfg, comments, {"delta_rad_s", "probability"}, rows, timestamp);
}

void run_sense_forward(const RunConfig& cfg, std::ostream& os, bool timestamp) {
    const rotor::SenseForwardParams& p = cfg.sense_forward;
    const rotor::CalibrationTable cal = obtain_calibration(p.calibration_path, cfg, p.grid, false);
    if (!p.calibration_out.empty()) {
        std::ofstream out(rotor::resolve_output_path(p.calibration_out));
        if (!out) throw ConfigError("cannot open calibration output '" + p.calibration_out + "'");
        out << rotor::calibration_to_json(cal).dump(2) << "\n";
    }
    const rotor::MeasurementSet meas = rotor::forward_measurements(cal, p.frame);
    rotor::write_measurements_csv(os, meas, timestamp);
}

void run_sense_invert(const RunConfig& cfg, std::ostream& os, bool /*timestamp*/) {
    const rotor::SenseInvertParams& p = cfg.sense_invert;
    std::ifstream in(rotor::resolve_output_path(p.measurements_path));
    if (!in) throw ConfigError("cannot open measurements file '" + p.measurements_path + "'");
    const rotor::MeasurementSet meas = rotor::read_measurements_csv(in);
    const rotor::CalibrationTable cal = obtain_calibration(p.calibration_path, cfg, p.grid, false);
    const rotor::FrameState frame = rotor::invert_measurements(cal, meas);
    os << rotor::frame_to_json(frame).dump(2) << "\n";
}

void run_budget(const RunConfig& cfg, std::ostream& os, bool /*timestamp*/) {
    const rotor::BudgetParams& p = cfg.budget;
    if (!(p.delta_omega > 0.0)) throw ConfigError("budget: delta_omega_rad_s must be positive");
    const bool need_sens = (p.beta_sensitivity == 0.0 || p.rho_sensitivity == 0.0);
    const rotor::CalibrationTable cal = obtain_calibration(p.calibration_path, cfg, p.grid, need_sens);
    const rotor::AccuracyBudget acc = rotor::accuracy_budget(
        cal, cfg.atom, p.delta_omega, p.N_rotors, p.T_meas, p.beta_sensitivity, p.rho_sensitivity);

    json doc;
    if (p.N_p > 0.0 && p.N_s > 0.0 && p.tau > 0.0) {
        const rotor::ShotNoiseBudget shot =
            rotor::shot_noise_budget(cfg.atom, cal, {p.N_p, p.N_s, p.tau}, p.N_rotors);
        doc = rotor::budgets_to_json(acc, shot);
    } else {
        doc = rotor::budgets_to_json(acc, rotor::ShotNoiseBudget{});
        doc["shot_noise"] = nullptr; // inputs not provided
    }
    doc["inputs"] = json{{"delta_omega_rad_s", p.delta_omega}, {"N_rotors", p.N_rotors},
                         {"T_meas_s", p.T_meas},               {"N_p", p.N_p},
                         {"N_s", p.N_s},                       {"tau_s", p.tau}};
    os << doc.dump(2) << "\n";
}

void run_classical(const RunConfig& cfg, std::ostream& os, bool timestamp) {
    const rotor::ClassicalRunParams& p = cfg.classical;
    const rotor::HarmonicUnits units = rotor::harmonic_units(cfg.lattice, cfg.atom);
    std::vector<std::string> comments;
    {
        std::ostringstream u;
        u << "b0_lambda0 = " << units.b0_lambda0 << ", b0_nm = " << units.b0_m * 1e9
          << ", hbar_Omega_h_E0 = " << units.hbar_Omega_h_E0;
        comments.push_back(u.str());
        comments.push_back("time in 1/Omega_h, lengths in b0, momenta in hbar/b0");
    }
    if (p.mode == "rings") {
        const rotor::RingStats stats =
            rotor::ring_statistics(p.init, cfg.lattice, cfg.atom, p.ds);
        emit_rows(os, cfg, comments,
                  {"r_min_b0", "r_max_b0", "f_inner", "f_outer", "s_end_reduced", "converged"},
                  {{stats.r_min, stats.r_max, stats.f_inner, stats.f_outer, stats.s_end,
                    stats.converged ? 1.0 : 0.0}},
                  timestamp);
        return;
    }
    const rotor::Trajectory traj = rotor::integrate(p.init, p.s_end, p.ds, cfg.lattice, cfg.atom,
                                                    p.store_every, p.full_bessel);
    {
        std::ostringstream d;
        d << "energy_initial_hbar_Omega_h = " << traj.energy_initial
          << ", max_energy_drift_rel = " << traj.max_energy_drift
          << ", max_f_norm_drift = " << traj.max_f_drift;
        comments.push_back(d.str());
    }
    std::vector<std::vector<double>> rows;
    for (const rotor::TrajectoryPoint& tp : traj.points)
        rows.push_back({tp.s, tp.state.r[0], tp.state.r[1], tp.state.p[0], tp.state.p[1],
                        tp.state.f[0], tp.state.f[1], tp.state.f[2]});
    emit_rows(os, cfg, comments, {"t", "x", "y", "p_x", "p_y", "f_x", "f_y", "f_z"}, rows,
              timestamp);
}

void run_recoil_table(const std::vector<std::string>& names, const std::string& out_path,
                      bool timestamp) {
    OutputStream out(out_path);
    std::ostream& os = *out.os;
    std::vector<const rotor::AtomSpec*> atoms;
    if (names.empty()) {
        for (const rotor::AtomSpec& a : rotor::atom_catalog()) atoms.push_back(&a);
    } else {
        for (const std::string& n : names) atoms.push_back(&rotor::find_atom(n));
    }
    if (timestamp) os << "# recoil temperatures T0 = E0/kB at each atom's resonance wavelength\n";
    os << "atom,resonance_lambda_nm,T0_uK\n";
    for (const rotor::AtomSpec* a : atoms) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s,%.6g,%.6g", a->name.c_str(),
                      a->resonance_lambda_m * 1e9, rotor::recoil_temperature_uK(*a));
        os << buf << "\n";
    }
}

void execute(const RunConfig& cfg, bool timestamp) {
    OutputStream out(cfg.output_path);
    std::ostream& os = *out.os;
    switch (cfg.command) {
        case Command::Field: run_field(cfg, os, timestamp); break;
        case Command::Spectrum: run_spectrum(cfg, os, timestamp); break;
        case Command::Density: run_density(cfg, os, timestamp); break;
        case Command::Raman: run_raman(cfg, os, timestamp); break;
        case Command::Ramsey: run_ramsey(cfg, os, timestamp); break;
        case Command::SenseForward: run_sense_forward(cfg, os, timestamp); break;
        case Command::SenseInvert: run_sense_invert(cfg, os, timestamp); break;
        case Command::Budget: run_budget(cfg, os, timestamp); break;
        case Command::Classical: run_classical(cfg, os, timestamp); break;
    }
}

// All optional flag overrides, shared across subcommands; presence is
// checked via CLI11 counts before anything is applied.
struct Flags {
    std::string atom, config, preset, out, format;
    double lambda0_nm = 0.0, V0 = 0.0, B0 = 0.0, nuclear_I = 0.0;
    int n_max = 0, n_points = 0, n_samples = 0, n_t = 0, n_delta = 0, level_n = 0, store_every = 0;
    int n_r = 0, n_phi = 0;
    double zeta_max = 0.0, r_max = 0.0, level_zeta = 0.0, r_min = 0.0;
    double omega_g = 0.0, delta = 0.0, gamma = 0.0, t_max = 0.0, tau_p = 0.0, T_delay = 0.0;
    double delta_min = 0.0, delta_max = 0.0;
    std::vector<double> B_ex, Omega, accel, r0, p0, f0;
    std::string calibration, calibration_out, measurements;
    double delta_omega = 0.0, N_rotors = 0.0, T_meas = 0.0, N_p = 0.0, N_s = 0.0, tau = 0.0;
    double beta_sens = 0.0, rho_sens = 0.0;
    double ds = 0.0, s_end = 0.0;
    bool full_bessel = false;
    std::string mode;
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "JSON run configuration to start from");
    sub->add_option("--preset", f.preset, "parameter preset: li6-paper or k40-classical");
    sub->add_option("--out", f.out, "output path (default stdout; ROTOR_OUT_DIR joins relative paths)");
    sub->add_option("--format", f.format, "output format: csv or json");
    sub->add_option("--atom", f.atom, "catalog atom name, e.g. 6Li or 40K");
    sub->add_option("--lambda0-nm", f.lambda0_nm, "lattice wavelength in nm");
    sub->add_option("--V0", f.V0, "trap depth scale in E0");
    sub->add_option("--B0", f.B0, "fictitious field scale in E0");
    sub->add_option("--nuclear-spin", f.nuclear_I, "nuclear spin I of the lattice spec");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum rotor toolkit for a hexagonal spin-dependent optical lattice"};
    app.require_subcommand(1);
    bool no_timestamp = false;
    app.add_flag("--no-header-timestamp", no_timestamp,
                 "omit the timestamp header line for byte-identical reruns");

    Flags f;
    CLI::App* field = app.add_subcommand("field", "sample the 2D potential and fictitious field");
    CLI::App* spectrum = app.add_subcommand("spectrum", "solve the coupled radial levels");
    CLI::App* density = app.add_subcommand("density", "areal density profile of one level");
    CLI::App* raman = app.add_subcommand("raman", "two-level Rabi dynamics");
    CLI::App* ramsey = app.add_subcommand("ramsey", "Ramsey fringe scan");
    CLI::App* sense_fwd = app.add_subcommand("sense-forward", "forward model: frame to splittings");
    CLI::App* sense_inv = app.add_subcommand("sense-invert", "invert nine splittings to the frame");
    CLI::App* budget = app.add_subcommand("budget", "accuracy and shot-noise budgets");
    CLI::App* classical = app.add_subcommand("classical", "large-F semiclassical trajectories");
    CLI::App* recoil = app.add_subcommand("recoil-table", "recoil temperatures of the atom catalog");

    for (CLI::App* sub : {field, spectrum, density, raman, ramsey, sense_fwd, sense_inv, budget, classical}) {
        sub->fallthrough(); // lets --no-header-timestamp trail the subcommand
        add_common(sub, f);
    }
    recoil->fallthrough();

    field->add_option("--r-min", f.r_min, "minimum radius, lambda0");
    field->add_option("--r-max", f.r_max, "maximum radius, lambda0");
    field->add_option("--n-r", f.n_r, "radial sample count");
    field->add_option("--n-phi", f.n_phi, "azimuthal sample count");

    for (CLI::App* sub : {spectrum, density}) {
        sub->add_option("--n-max", f.n_max, "levels per zeta");
        sub->add_option("--zeta-max", f.zeta_max, "largest |zeta|");
        sub->add_option("--n-points", f.n_points, "interior grid points");
        sub->add_option("--r-max", f.r_max, "radial box size, lambda0");
    }
    density->add_option("--level-n", f.level_n, "radial quantum number");
    density->add_option("--level-zeta", f.level_zeta, "zeta of the level");
    density->add_option("--n-samples", f.n_samples, "radial sample count");

    raman->add_option("--omega-g", f.omega_g, "coupling omega_g, rad/s");
    raman->add_option("--delta", f.delta, "detuning, rad/s");
    raman->add_option("--gamma", f.gamma, "decay rate, rad/s");
    raman->add_option("--t-max", f.t_max, "scan end time, s");
    raman->add_option("--n-t", f.n_t, "time sample count");

    ramsey->add_option("--omega-g", f.omega_g, "coupling omega_g, rad/s");
    ramsey->add_option("--gamma", f.gamma, "decay rate, rad/s");
    ramsey->add_option("--tau-p", f.tau_p, "pulse duration, s");
    ramsey->add_option("--T-delay", f.T_delay, "free evolution time, s");
    ramsey->add_option("--delta-min", f.delta_min, "scan start, rad/s");
    ramsey->add_option("--delta-max", f.delta_max, "scan end, rad/s");
    ramsey->add_option("--n-delta", f.n_delta, "scan sample count");

    sense_fwd->add_option("--B-ex", f.B_ex, "external field B (T), 3 values")->expected(3);
    sense_fwd->add_option("--Omega", f.Omega, "rotation rate (rad/s), 3 values")->expected(3);
    sense_fwd->add_option("--accel", f.accel, "acceleration (m/s^2), 3 values")->expected(3);
    sense_fwd->add_option("--calibration", f.calibration, "calibration JSON to reuse");
    sense_fwd->add_option("--calibration-out", f.calibration_out, "write the calibration JSON here");
    sense_inv->add_option("--measurements", f.measurements, "measurement CSV to invert");
    sense_inv->add_option("--calibration", f.calibration, "calibration JSON to reuse");
    for (CLI::App* sub : {sense_fwd, sense_inv}) sub->add_option("--n-points", f.n_points, "grid points");

    budget->add_option("--delta-omega", f.delta_omega, "laser linewidth, rad/s");
    budget->add_option("--N-rotors", f.N_rotors, "rotor count");
    budget->add_option("--T-meas", f.T_meas, "measurement time, s");
    budget->add_option("--N-p", f.N_p, "pump photon number");
    budget->add_option("--N-s", f.N_s, "Stokes photon number");
    budget->add_option("--tau", f.tau, "Raman pulse duration, s");
    budget->add_option("--beta-sens", f.beta_sens, "override beta log-derivative sensitivity");
    budget->add_option("--rho-sens", f.rho_sens, "override rho log-derivative sensitivity");
    budget->add_option("--calibration", f.calibration, "calibration JSON to reuse");

    classical->add_option("--r0", f.r0, "initial position, b0 (2 values)")->expected(2);
    classical->add_option("--p0", f.p0, "initial momentum, hbar/b0 (2 values)")->expected(2);
    classical->add_option("--f0", f.f0, "initial spin direction (3 values)")->expected(3);
    classical->add_option("--ds", f.ds, "reduced time step");
    classical->add_option("--s-end", f.s_end, "reduced end time");
    classical->add_option("--store-every", f.store_every, "thin stored samples");
    classical->add_flag("--full-bessel", f.full_bessel, "use the full Bessel force law");
    classical->add_option("--mode", f.mode, "trajectory or rings");

    std::vector<std::string> recoil_atoms;
    std::string recoil_out;
    recoil->add_option("--atoms", recoil_atoms, "atom names (default: whole catalog)");
    recoil->add_option("--out", recoil_out, "output path (default stdout)");

    try {
        app.parse(argc, argv);

        if (recoil->parsed()) {
            run_recoil_table(recoil_atoms, recoil_out, !no_timestamp);
            return 0;
        }

        const std::pair<CLI::App*, Command> dispatch[] = {
            {field, Command::Field},           {spectrum, Command::Spectrum},
            {density, Command::Density},       {raman, Command::Raman},
            {ramsey, Command::Ramsey},         {sense_fwd, Command::SenseForward},
            {sense_inv, Command::SenseInvert}, {budget, Command::Budget},
            {classical, Command::Classical},
        };
        CLI::App* sub = nullptr;
        RunConfig cfg;
        for (const auto& [s, c] : dispatch)
            if (s->parsed()) {
                sub = s;
                cfg = base_config(c);
            }
        if (sub == nullptr) throw ConfigError("no subcommand given");

        const auto has = [&sub](const char* name) {
            const CLI::Option* opt = sub->get_option_no_throw(name);
            return opt != nullptr && opt->count() > 0;
        };

        if (has("--preset")) apply_preset(cfg, f.preset);
        if (has("--config")) {
            std::ifstream in(f.config);
            if (!in) throw ConfigError("cannot open config file '" + f.config + "'");
            json file_json;
            try {
                in >> file_json;
            } catch (const json::exception& e) {
                throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
            }
            json merged = rotor::run_config_to_json(cfg);
            merged.merge_patch(file_json);
            const RunConfig parsed = rotor::parse_run_config(merged);
            if (parsed.command != cfg.command)
                throw ConfigError("config file command '" + command_name(parsed.command) +
                                  "' does not match subcommand '" + command_name(cfg.command) + "'");
            cfg = parsed;
        }

        // Flag overrides, applied last.
        if (has("--atom")) {
            cfg.atom_name = f.atom;
            cfg.atom = rotor::find_atom(f.atom);
        }
        if (has("--lambda0-nm")) cfg.lattice.lambda0 = f.lambda0_nm * 1e-9;
        if (has("--V0")) cfg.lattice.V0 = f.V0;
        if (has("--B0")) cfg.lattice.B0 = f.B0;
        if (has("--nuclear-spin")) cfg.lattice.nuclear_spin_I = f.nuclear_I;
        if (has("--out")) cfg.output_path = f.out;
        if (has("--format")) {
            if (f.format != "csv" && f.format != "json")
                throw ConfigError("--format must be csv or json");
            cfg.output_format = f.format;
        }

        if (has("--r-min")) cfg.field.r_min = f.r_min;
        if (has("--n-r")) cfg.field.n_r = f.n_r;
        if (has("--n-phi")) cfg.field.n_phi = f.n_phi;
        if (has("--r-max")) {
            cfg.field.r_max = f.r_max;
            cfg.spectrum.grid.r_max = f.r_max;
            cfg.density.spectrum.grid.r_max = f.r_max;
        }
        if (has("--n-max")) {
            cfg.spectrum.n_max = f.n_max;
            cfg.density.spectrum.n_max = f.n_max;
        }
        if (has("--zeta-max")) {
            cfg.spectrum.zeta_max = f.zeta_max;
            cfg.density.spectrum.zeta_max = f.zeta_max;
        }
        if (has("--n-points")) {
            cfg.spectrum.grid.n_points = f.n_points;
            cfg.density.spectrum.grid.n_points = f.n_points;
            cfg.sense_forward.grid.n_points = f.n_points;
            cfg.sense_invert.grid.n_points = f.n_points;
            cfg.budget.grid.n_points = f.n_points;
        }
        if (has("--level-n")) cfg.density.level_n = f.level_n;
        if (has("--level-zeta")) cfg.density.level_zeta = f.level_zeta;
        if (has("--n-samples")) cfg.density.n_samples = f.n_samples;

        if (has("--omega-g")) {
            cfg.raman.cfg.omega_g = f.omega_g;
            cfg.ramsey.cfg.omega_g = f.omega_g;
        }
        if (has("--delta")) cfg.raman.cfg.delta = f.delta;
        if (has("--gamma")) {
            cfg.raman.cfg.gamma = f.gamma;
            cfg.ramsey.cfg.gamma = f.gamma;
        }
        if (has("--t-max")) cfg.raman.t_max = f.t_max;
        if (has("--n-t")) cfg.raman.n_t = f.n_t;
        if (has("--tau-p")) cfg.ramsey.cfg.tau_p = f.tau_p;
        if (has("--T-delay")) cfg.ramsey.cfg.T_delay = f.T_delay;
        if (has("--delta-min")) cfg.ramsey.delta_min = f.delta_min;
        if (has("--delta-max")) cfg.ramsey.delta_max = f.delta_max;
        if (has("--n-delta")) cfg.ramsey.n_delta = f.n_delta;

        if (has("--B-ex"))
            cfg.sense_forward.frame.B_ex = {f.B_ex[0], f.B_ex[1], f.B_ex[2]};
        if (has("--Omega"))
            cfg.sense_forward.frame.Omega = {f.Omega[0], f.Omega[1], f.Omega[2]};
        if (has("--accel"))
            cfg.sense_forward.frame.accel = {f.accel[0], f.accel[1], f.accel[2]};
        if (has("--calibration")) {
            cfg.sense_forward.calibration_path = f.calibration;
            cfg.sense_invert.calibration_path = f.calibration;
            cfg.budget.calibration_path = f.calibration;
        }
        if (has("--calibration-out")) cfg.sense_forward.calibration_out = f.calibration_out;
        if (has("--measurements")) cfg.sense_invert.measurements_path = f.measurements;

        if (has("--delta-omega")) cfg.budget.delta_omega = f.delta_omega;
        if (has("--N-rotors")) cfg.budget.N_rotors = f.N_rotors;
        if (has("--T-meas")) cfg.budget.T_meas = f.T_meas;
        if (has("--N-p")) cfg.budget.N_p = f.N_p;
        if (has("--N-s")) cfg.budget.N_s = f.N_s;
        if (has("--tau")) cfg.budget.tau = f.tau;
        if (has("--beta-sens")) cfg.budget.beta_sensitivity = f.beta_sens;
        if (has("--rho-sens")) cfg.budget.rho_sensitivity = f.rho_sens;

        if (has("--r0")) cfg.classical.init.r = {f.r0[0], f.r0[1]};
        if (has("--p0")) cfg.classical.init.p = {f.p0[0], f.p0[1]};
        if (has("--f0")) cfg.classical.init.f = {f.f0[0], f.f0[1], f.f0[2]};
        if (has("--ds")) cfg.classical.ds = f.ds;
        if (has("--s-end")) cfg.classical.s_end = f.s_end;
        if (has("--store-every")) cfg.classical.store_every = f.store_every;
        if (has("--full-bessel")) cfg.classical.full_bessel = true;
        if (has("--mode")) cfg.classical.mode = f.mode;
        if (cfg.classical.mode != "trajectory" && cfg.classical.mode != "rings")
            throw ConfigError("classical: mode must be 'trajectory' or 'rings'");

        if (sense_inv->parsed() && cfg.sense_invert.measurements_path.empty())
            throw ConfigError("sense-invert: --measurements (or measurements_path) is required");

        execute(cfg, !no_timestamp);
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help and friends
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const rotor::SingularityError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const rotor::SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const rotor::MeasurementError& e) {
        std::cerr << "measurement error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
