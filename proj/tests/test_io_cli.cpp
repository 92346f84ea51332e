#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rotor/constants.hpp"
#include "rotor/errors.hpp"
#include "rotor/io.hpp"
#include "rotor/raman.hpp"
#include "rotor/sensing.hpp"
#include "rotor/spectrum.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace rotor;

namespace {

// Recursive comparison with a pure relative tolerance on numbers; key sets
// and array lengths must match exactly. Unit-suffixed fields pass through a
// conversion on every serialization pass, so bitwise equality is too strict.
bool json_close(const json& a, const json& b, double rel = 1e-12) {
    if (a.is_object()) {
        if (!b.is_object() || a.size() != b.size()) return false;
        for (const auto& item : a.items()) {
            if (!b.contains(item.key())) return false;
            if (!json_close(item.value(), b.at(item.key()), rel)) return false;
        }
        return true;
    }
    if (a.is_array()) {
        if (!b.is_array() || a.size() != b.size()) return false;
        for (size_t i = 0; i < a.size(); ++i)
            if (!json_close(a[i], b[i], rel)) return false;
        return true;
    }
    if (a.is_number() && b.is_number()) {
        const double x = a.get<double>();
        const double y = b.get<double>();
        if (x == y) return true;
        return std::abs(x - y) <= rel * std::max(std::abs(x), std::abs(y));
    }
    return a == b;
}

CalibrationTable published_cal() {
    CalibrationTable cal;
    cal.atom = find_atom("6Li");
    cal.lambda0 = 670.8e-9;
    cal.n10.beta_z_half = 0.107807;
    cal.n10.beta_par_half = 0.478;
    cal.n10.rho_par_half = 0.0986575;
    cal.n10.beta_z_3half = 0.117236;
    cal.n10.beta_z_5half = 0.111702;
    cal.n5.beta_z_half = 0.152948;
    cal.n5.beta_par_half = 0.462905;
    cal.n5.rho_par_half = 0.109363;
    cal.n5.beta_z_3half = 0.161531;
    cal.n5.beta_z_5half = 0.154678;
    cal.beta_log_derivative = 0.0377475;
    cal.rho_log_derivative = 0.139986;
    return cal;
}

// One config per command with every parameter moved off its default, so a
// lossy serialization of any field breaks the round trip.
RunConfig sample_config(Command c) {
    RunConfig cfg;
    cfg.command = c;
    cfg.atom_name = "40K";
    cfg.atom = find_atom("40K");
    cfg.lattice.lambda0 = 766.5e-9;
    cfg.lattice.V0 = 50.0;
    cfg.lattice.B0 = 90.0;
    cfg.lattice.nuclear_spin_I = 4.0;
    cfg.lattice.detuning_Delta = -6.283e12;
    cfg.lattice.gamma_e = 3.7e7;
    cfg.output_path = "table.csv";
    cfg.output_format = "json";
    cfg.field = {0.01, 0.3, 7, 5};
    cfg.spectrum.n_max = 3;
    cfg.spectrum.zeta_max = 1.5;
    cfg.spectrum.grid.r_max = 1.2;
    cfg.spectrum.grid.n_points = 256;
    cfg.density.spectrum = cfg.spectrum;
    cfg.density.level_n = 1;
    cfg.density.level_zeta = -1.5;
    cfg.density.n_samples = 33;
    cfg.raman.cfg.omega_g = 800.0;
    cfg.raman.cfg.delta = -120.0;
    cfg.raman.cfg.gamma = 3.0;
    cfg.raman.t_max = 0.01;
    cfg.raman.n_t = 17;
    cfg.ramsey.cfg.omega_g = 900.0;
    cfg.ramsey.cfg.gamma = 2.0;
    cfg.ramsey.cfg.tau_p = 1e-3;
    cfg.ramsey.cfg.T_delay = 0.05;
    cfg.ramsey.delta_min = -300.0;
    cfg.ramsey.delta_max = 300.0;
    cfg.ramsey.n_delta = 41;
    cfg.sense_forward.frame.B_ex = {0.5e-9, -0.4e-9, 0.3e-9};
    cfg.sense_forward.frame.Omega = {0.3, -0.2, 0.1};
    cfg.sense_forward.frame.accel = {9.81, 9.0, 8.5};
    cfg.sense_forward.calibration_path = "cal.json";
    cfg.sense_forward.calibration_out = "cal_out.json";
    cfg.sense_forward.grid.r_max = 1.4;
    cfg.sense_forward.grid.n_points = 300;
    cfg.sense_invert.measurements_path = "meas.csv";
    cfg.sense_invert.calibration_path = "cal.json";
    cfg.sense_invert.grid.n_points = 280;
    cfg.budget.delta_omega = 1.005;
    cfg.budget.N_rotors = 4.99e8;
    cfg.budget.T_meas = 2.0;
    cfg.budget.N_p = 7.467e24;
    cfg.budget.N_s = 2.987e25;
    cfg.budget.tau = 1.644e-3;
    cfg.budget.beta_sensitivity = 0.0377475;
    cfg.budget.rho_sensitivity = 0.139986;
    cfg.budget.calibration_path = "cal.json";
    cfg.classical.init.r = {5.0, 0.0};
    cfg.classical.init.p = {0.0, -3.0};
    cfg.classical.init.f = {-0.9975, 0.05, 0.05};
    cfg.classical.ds = 1e-3;
    cfg.classical.s_end = 20.0;
    cfg.classical.store_every = 10;
    cfg.classical.full_bessel = true;
    cfg.classical.mode = "rings";
    return cfg;
}

MeasurementSet nice_measurements() {
    MeasurementSet m;
    m.delta0 = {1.5, 2.5, 3.5};
    m.delta1_n5 = {-4.25, 5.25, -6.25};
    m.delta1_n10 = {7.125, -8.125, 9.125};
    return m;
}

std::string measurements_text() {
    std::ostringstream ss;
    write_measurements_csv(ss, nice_measurements(), false);
    return ss.str();
}

MeasurementSet parse_measurements(const std::string& text) {
    std::istringstream in(text);
    return read_measurements_csv(in);
}

std::string replace_once(std::string text, const std::string& from, const std::string& to) {
    const size_t pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, from.size(), to);
}

// ---- process-level helpers ---------------------------------------------------

const std::string& scratch_dir() {
    static const std::string dir = [] {
        char tmpl[] = "/tmp/rotor_io_XXXXXX";
        char* d = mkdtemp(tmpl);
        REQUIRE(d != nullptr);
        return std::string(d);
    }();
    return dir;
}

std::string write_file(const std::string& name, const std::string& content) {
    const std::string path = scratch_dir() + "/" + name;
    std::ofstream out(path);
    REQUIRE(out.good());
    out << content;
    return path;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

// Spawns the installed binary (ctest exports ROTOR_CLI) through the shell,
// capturing exit code and both streams.
CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    const char* bin = std::getenv("ROTOR_CLI");
    REQUIRE(bin != nullptr);
    static int seq = 0;
    const std::string base = scratch_dir() + "/cli" + std::to_string(seq++);
    const std::string cmd =
        env_prefix + std::string(bin) + " " + args + " >" + base + ".out 2>" + base + ".err";
    const int status = std::system(cmd.c_str());
    CliResult r;
    if (status != -1 && WIFEXITED(status)) r.code = WEXITSTATUS(status);
    r.out = slurp(base + ".out");
    r.err = slurp(base + ".err");
    return r;
}

std::vector<std::string> data_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') lines.push_back(line);
    return lines;
}

std::vector<double> split_row(const std::string& line) {
    std::vector<double> vals;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    return vals;
}

} // namespace

// ---- path resolution and table writer ----------------------------------------

TEST_CASE("output paths join ROTOR_OUT_DIR only when relative") {
    unsetenv("ROTOR_OUT_DIR");
    CHECK(resolve_output_path("a/b.csv") == "a/b.csv");
    CHECK(resolve_output_path("") == "");

    setenv("ROTOR_OUT_DIR", "/data/runs", 1);
    CHECK(resolve_output_path("a.csv") == "/data/runs/a.csv");
    CHECK(resolve_output_path("sub/a.csv") == "/data/runs/sub/a.csv");
    CHECK(resolve_output_path("/abs/a.csv") == "/abs/a.csv");
    CHECK(resolve_output_path("") == "");

    setenv("ROTOR_OUT_DIR", "", 1);
    CHECK(resolve_output_path("a.csv") == "a.csv");
    unsetenv("ROTOR_OUT_DIR");
}

TEST_CASE("table writer emits comments, header and %.12g rows") {
    std::ostringstream ss;
    write_table(ss, {"one note"}, {"a", "b"}, {{1.5, -2.25}, {3.0, 4.0625}}, false);
    CHECK(ss.str() == "# one note\na,b\n1.5,-2.25\n3,4.0625\n");

    std::ostringstream ts;
    write_table(ts, {}, {"x"}, {{1.0}}, true);
    CHECK(ts.str().rfind("# generated: ", 0) == 0);
    CHECK(ts.str().find("Z\nx\n1\n") != std::string::npos);

    std::ostringstream bad;
    CHECK_THROWS_AS(write_table(bad, {}, {"a", "b"}, {{1.0}}, false), ConfigError);
}

// ---- measurement CSV ----------------------------------------------------------

TEST_CASE("measurement CSV round trip preserves all nine splittings") {
    const MeasurementSet m = nice_measurements();
    const std::string text = measurements_text();
    CHECK(text.find("plane,script_n,delta_rad_s\n") != std::string::npos);
    CHECK(text.find("xy,0,1.5\n") != std::string::npos);
    CHECK(text.find("zx,10,9.125\n") != std::string::npos);

    const MeasurementSet back = parse_measurements(text);
    for (int p = 0; p < 3; ++p) {
        CHECK(back.delta0[p] == m.delta0[p]);
        CHECK(back.delta1_n5[p] == m.delta1_n5[p]);
        CHECK(back.delta1_n10[p] == m.delta1_n10[p]);
    }

    std::ostringstream ts;
    write_measurements_csv(ts, m, true);
    CHECK(ts.str().rfind("# generated: ", 0) == 0);
}

TEST_CASE("measurement CSV grammar rejections") {
    const std::string good = measurements_text();
    CHECK_NOTHROW(parse_measurements(good));

    CHECK_THROWS_AS(
        parse_measurements(replace_once(good, "plane,script_n,delta_rad_s", "plane,script,delta")),
        ConfigError);
    CHECK_THROWS_AS(parse_measurements(replace_once(good, "xy,5,", "xq,5,")), ConfigError);
    CHECK_THROWS_AS(parse_measurements(replace_once(good, "yz,5,", "yz,7,")), ConfigError);
    CHECK_THROWS_AS(parse_measurements(replace_once(good, "1.5", "soon")), ConfigError);
    CHECK_THROWS_AS(parse_measurements(good + "zx,10\n"), ConfigError);   // two fields only
    CHECK_THROWS_AS(parse_measurements(good + "xy,0,1.0\n"), ConfigError); // duplicate
    CHECK_THROWS_AS(parse_measurements(replace_once(good, "zx,10,9.125\n", "")), ConfigError);
}

// ---- atom and lattice documents -----------------------------------------------

TEST_CASE("atom serialization: defaults, strict keys and types") {
    const AtomSpec li = find_atom("6Li");
    const json j = atom_to_json(li);
    const AtomSpec back = atom_from_json(j);
    CHECK(back.name == li.name);
    CHECK(back.mass_kg == doctest::Approx(li.mass_kg).epsilon(1e-14));
    CHECK(back.total_F == li.total_F);
    CHECK(back.resonance_lambda_m == doctest::Approx(li.resonance_lambda_m).epsilon(1e-14));

    const AtomSpec minimal =
        atom_from_json(json{{"mass_u", 40.0}, {"nuclear_spin_I", 4.0}, {"total_F", 4.5}});
    CHECK(minimal.name == "custom");
    CHECK(minimal.g_factor == kGElectron);
    CHECK(minimal.resonance_lambda_m == 0.0);

    json extra = j;
    extra["charge"] = 1;
    CHECK_THROWS_AS(atom_from_json(extra), ConfigError);
    json typed = j;
    typed["mass_u"] = "heavy";
    CHECK_THROWS_AS(atom_from_json(typed), ConfigError);
    CHECK_THROWS_AS(atom_from_json(json{{"nuclear_spin_I", 1.0}, {"total_F", 1.5}}), ConfigError);
}

TEST_CASE("lattice serialization validates physical inputs") {
    LatticeSpec spec;
    spec.lambda0 = 670.8e-9;
    spec.V0 = 100.0;
    spec.B0 = 180.0;
    spec.nuclear_spin_I = 1.0;
    spec.detuning_Delta = -6.283e12;
    spec.gamma_e = 3.7e7;
    const json j = lattice_to_json(spec);
    const LatticeSpec back = lattice_from_json(j);
    CHECK(back.lambda0 == doctest::Approx(spec.lambda0).epsilon(1e-14));
    CHECK(back.V0 == spec.V0);
    CHECK(back.B0 == spec.B0);
    CHECK(back.beta_mix == spec.beta_mix);
    CHECK(back.detuning_Delta == spec.detuning_Delta);
    CHECK(back.gamma_e == spec.gamma_e);

    json missing = j;
    missing.erase("V0_E0");
    CHECK_THROWS_AS(lattice_from_json(missing), ConfigError);
    json unknown = j;
    unknown["tilt"] = 0.1;
    CHECK_THROWS_AS(lattice_from_json(unknown), ConfigError);
    json bad = j;
    bad["V0_E0"] = -5.0;
    CHECK_THROWS_AS(lattice_from_json(bad), ConfigError);
    json mix = j;
    mix["beta_mix"] = 0.9; // above 1/sqrt2
    CHECK_THROWS_AS(lattice_from_json(mix), ConfigError);
}

// ---- run configuration ---------------------------------------------------------

TEST_CASE("command names are a bijection") {
    for (Command c : {Command::Field, Command::Spectrum, Command::Density, Command::Raman,
                      Command::Ramsey, Command::SenseForward, Command::SenseInvert, Command::Budget,
                      Command::Classical})
        CHECK(command_from_name(command_name(c)) == c);
    CHECK_THROWS_AS(command_from_name("orbit"), ConfigError);
}

TEST_CASE("run config round trip is stable for every command") {
    for (Command c : {Command::Field, Command::Spectrum, Command::Density, Command::Raman,
                      Command::Ramsey, Command::SenseForward, Command::SenseInvert, Command::Budget,
                      Command::Classical}) {
        CAPTURE(command_name(c));
        const json j0 = run_config_to_json(sample_config(c));
        const RunConfig c1 = parse_run_config(j0);
        const json j1 = run_config_to_json(c1);
        CHECK(json_close(j0, j1));
        CHECK(json_close(j1, run_config_to_json(parse_run_config(j1))));
    }

    // spot checks of parsed fields that are easy to lose
    const RunConfig cls = parse_run_config(run_config_to_json(sample_config(Command::Classical)));
    CHECK(cls.classical.mode == "rings");
    CHECK(cls.classical.full_bessel);
    CHECK(cls.classical.init.f[0] == -0.9975);
    CHECK(cls.classical.store_every == 10);
    const RunConfig inv = parse_run_config(run_config_to_json(sample_config(Command::SenseInvert)));
    CHECK(inv.sense_invert.measurements_path == "meas.csv");
    CHECK(inv.sense_invert.grid.n_points == 280);
    const RunConfig bud = parse_run_config(run_config_to_json(sample_config(Command::Budget)));
    CHECK(bud.budget.tau == 1.644e-3);
    CHECK(bud.budget.beta_sensitivity == 0.0377475);
    const RunConfig fwd = parse_run_config(run_config_to_json(sample_config(Command::SenseForward)));
    CHECK(fwd.sense_forward.frame.accel[2] == 8.5);
    CHECK(fwd.sense_forward.calibration_out == "cal_out.json");

    // inline atom object instead of a catalog name
    RunConfig custom = sample_config(Command::Raman);
    custom.atom_name.clear();
    custom.atom.name = "toy";
    custom.atom.mass_kg = 40.0 * kAmu;
    custom.atom.nuclear_spin_I = 4.0;
    custom.atom.total_F = 4.5;
    const json cj = run_config_to_json(custom);
    CHECK(cj.at("atom").is_object());
    const RunConfig cback = parse_run_config(cj);
    CHECK(cback.atom_name.empty());
    CHECK(cback.atom.name == "toy");
    CHECK(cback.atom.total_F == 4.5);
    CHECK(json_close(cj, run_config_to_json(cback)));
}

TEST_CASE("run config strict schema and typed errors") {
    const json base = run_config_to_json(sample_config(Command::Spectrum));
    CHECK_NOTHROW(parse_run_config(base));

    auto mutated = [&base](auto&& edit) {
        json j = base;
        edit(j);
        return j;
    };
    CHECK_THROWS_AS(parse_run_config(mutated([](json& j) { j["surprise"] = 1; })), ConfigError);
    CHECK_THROWS_AS(parse_run_config(mutated([](json& j) { j["format"] = "rotor-walk"; })),
                    ConfigError);
    CHECK_THROWS_AS(parse_run_config(mutated([](json& j) { j["version"] = 2; })), ConfigError);
    CHECK_THROWS_AS(parse_run_config(mutated([](json& j) { j["command"] = "orbit"; })), ConfigError);
    CHECK_THROWS_AS(parse_run_config(mutated([](json& j) { j.erase("atom"); })), ConfigError);
    CHECK_THROWS_AS(parse_run_config(mutated([](json& j) { j.erase("lattice"); })), ConfigError);
    CHECK_THROWS_AS(parse_run_config(mutated([](json& j) { j["atom"] = "5Li"; })), ConfigError);
    CHECK_THROWS_AS(parse_run_config(mutated([](json& j) { j["output_format"] = "yaml"; })),
                    ConfigError);
    CHECK_THROWS_AS(parse_run_config(mutated([](json& j) { j["lattice"]["tilt"] = 0.1; })),
                    ConfigError);
    CHECK_THROWS_AS(parse_run_config(mutated([](json& j) { j["params"]["n_pts"] = 3; })),
                    ConfigError);
    CHECK_THROWS_AS(parse_run_config(mutated([](json& j) { j["params"]["n_points"] = 2.5; })),
                    ConfigError);

    json raman = run_config_to_json(sample_config(Command::Raman));
    raman["params"]["t_max_s"] = "soon";
    CHECK_THROWS_AS(parse_run_config(raman), ConfigError);
    json atom_obj = base;
    atom_obj["atom"] = atom_to_json(find_atom("40K"));
    atom_obj["atom"]["charge"] = 1;
    CHECK_THROWS_AS(parse_run_config(atom_obj), ConfigError);

    json cls = run_config_to_json(sample_config(Command::Classical));
    cls["params"]["mode"] = "orbit";
    CHECK_THROWS_AS(parse_run_config(cls), ConfigError);
    json flag = run_config_to_json(sample_config(Command::Classical));
    flag["params"]["full_bessel"] = 1;
    CHECK_THROWS_AS(parse_run_config(flag), ConfigError);

    json inv = run_config_to_json(sample_config(Command::SenseInvert));
    inv["params"]["measurements_path"] = "";
    CHECK_THROWS_AS(parse_run_config(inv), ConfigError);
}

// ---- domain documents -----------------------------------------------------------

TEST_CASE("spectrum document round trip preserves levels and wavefunctions") {
    LatticeSpec spec;
    spec.lambda0 = 670.8e-9;
    spec.V0 = 100.0;
    spec.B0 = 180.0;
    spec.nuclear_spin_I = 1.0;
    RadialGrid grid;
    grid.r_max = 1.2;
    grid.n_points = 128;
    const SpectrumResult res = solve_spectrum(spec, 1, 0.5, grid);

    const json j1 = spectrum_to_json(res);
    CHECK(j1.at("format") == "rotor-spectrum");
    const SpectrumResult back = spectrum_from_json(json::parse(j1.dump()));
    REQUIRE(back.levels.size() == res.levels.size());
    for (size_t i = 0; i < res.levels.size(); ++i) {
        CHECK(back.levels[i].n == res.levels[i].n);
        CHECK(back.levels[i].zeta == res.levels[i].zeta);
        CHECK(back.levels[i].energy == res.levels[i].energy);
        REQUIRE(back.levels[i].psi_up.size() == res.levels[i].psi_up.size());
        CHECK(back.levels[i].psi_up[40] == res.levels[i].psi_up[40]);
        CHECK(back.levels[i].psi_down[40] == res.levels[i].psi_down[40]);
    }
    CHECK(back.grid.n_points == res.grid.n_points);
    CHECK(back.grid_error_estimate == res.grid_error_estimate);
    CHECK(json_close(j1, spectrum_to_json(back)));

    json badlvl = j1;
    badlvl["levels"][0]["spin"] = 1;
    CHECK_THROWS_AS(spectrum_from_json(badlvl), ConfigError);
    json badgrid = j1;
    badgrid["grid"]["n_pts"] = 5;
    CHECK_THROWS_AS(spectrum_from_json(badgrid), ConfigError);
    json wrong = j1;
    wrong["format"] = "rotor-run";
    CHECK_THROWS_AS(spectrum_from_json(wrong), ConfigError);
}

TEST_CASE("calibration document round trip and schema") {
    const CalibrationTable cal = published_cal();
    const json j1 = calibration_to_json(cal);
    CHECK(j1.at("format") == "rotor-calibration");
    const CalibrationTable back = calibration_from_json(j1);
    CHECK(back.atom.name == "6Li");
    CHECK(back.lambda0 == doctest::Approx(cal.lambda0).epsilon(1e-14));
    CHECK(back.n5.beta_z_half == cal.n5.beta_z_half);
    CHECK(back.n10.rho_par_half == cal.n10.rho_par_half);
    CHECK(back.beta_log_derivative == cal.beta_log_derivative);
    CHECK(back.beta_tilde(10) == doctest::Approx(cal.beta_tilde(10)).epsilon(1e-15));
    CHECK(json_close(j1, calibration_to_json(back)));

    json extra = j1;
    extra["script_n_10"]["beta_z_7half"] = 0.1;
    CHECK_THROWS_AS(calibration_from_json(extra), ConfigError);
    json missing = j1;
    missing["script_n_5"].erase("beta_z_half");
    CHECK_THROWS_AS(calibration_from_json(missing), ConfigError);
    json wrong = j1;
    wrong["format"] = "rotor-frame";
    CHECK_THROWS_AS(calibration_from_json(wrong), ConfigError);
}

TEST_CASE("frame and budget documents") {
    FrameState frame;
    frame.B_ex = {0.5e-9, -0.4e-9, 0.3e-9};
    frame.Omega = {0.3, -0.2, 0.1};
    frame.accel = {9.81, 9.0, 8.5};
    const json j = frame_to_json(frame);
    const FrameState back = frame_from_json(j);
    for (int i = 0; i < 3; ++i) {
        CHECK(back.B_ex[i] == frame.B_ex[i]);
        CHECK(back.Omega[i] == frame.Omega[i]);
        CHECK(back.accel[i] == frame.accel[i]);
    }
    json short_vec = j;
    short_vec["B_ex_T"] = json::array({1.0, 2.0});
    CHECK_THROWS_AS(frame_from_json(short_vec), ConfigError);
    json typed = j;
    typed["Omega_rad_s"][1] = "fast";
    CHECK_THROWS_AS(frame_from_json(typed), ConfigError);
    json old = j;
    old["version"] = 0;
    CHECK_THROWS_AS(frame_from_json(old), ConfigError);

    AccuracyBudget acc;
    acc.omega_laser = 2.8e15;
    acc.delta_B_over_B = 2.7e-17;
    ShotNoiseBudget shot;
    shot.delta_phi = 8.6e-13;
    const json b = budgets_to_json(acc, shot);
    CHECK(b.at("format") == "rotor-budget");
    CHECK(b.at("version") == 1);
    CHECK(b.at("accuracy").at("omega_laser_rad_s") == 2.8e15);
    CHECK(b.at("accuracy").at("delta_B_over_B") == 2.7e-17);
    CHECK(b.at("shot_noise").at("delta_phi_rad") == 8.6e-13);
    CHECK(b.at("accuracy").size() == 11);
    CHECK(b.at("shot_noise").size() == 5);
}

// ---- the command-line binary -----------------------------------------------------

TEST_CASE("cli: recoil table is deterministic without the timestamp header") {
    const CliResult r1 = run_cli("recoil-table --no-header-timestamp");
    const CliResult r2 = run_cli("recoil-table --no-header-timestamp");
    CHECK(r1.code == 0);
    CHECK(r1.out == r2.out);
    const std::vector<std::string> lines = data_lines(r1.out);
    REQUIRE(lines.size() == 7); // header + six atoms
    CHECK(lines[0] == "atom,resonance_lambda_nm,T0_uK");
    bool found = false;
    for (const std::string& line : lines)
        if (line.rfind("6Li,", 0) == 0) {
            found = true;
            std::istringstream ss(line);
            std::string name, lam, t0;
            std::getline(ss, name, ',');
            std::getline(ss, lam, ',');
            std::getline(ss, t0, ',');
            CHECK(std::stod(t0) ==
                  doctest::Approx(recoil_temperature_uK(find_atom("6Li"))).epsilon(1e-5));
        }
    CHECK(found);

    const CliResult one = run_cli("recoil-table --atoms 40K --no-header-timestamp");
    CHECK(one.code == 0);
    CHECK(data_lines(one.out).size() == 2);
}

TEST_CASE("cli: field table written through ROTOR_OUT_DIR is byte-stable") {
    const std::string args =
        "field --n-r 3 --n-phi 2 --r-max 0.3 --out field.csv --no-header-timestamp";
    const std::string env = "ROTOR_OUT_DIR=" + scratch_dir() + " ";
    const CliResult r1 = run_cli(args, env);
    CHECK(r1.code == 0);
    const std::string first = slurp(scratch_dir() + "/field.csv");
    REQUIRE(!first.empty());
    const CliResult r2 = run_cli(args, env);
    CHECK(r2.code == 0);
    CHECK(slurp(scratch_dir() + "/field.csv") == first);

    const std::vector<std::string> lines = data_lines(first);
    REQUIRE(lines.size() == 7); // header + 3x2 samples
    CHECK(lines[0] == "r_lambda0,phi_rad,V_E0,B_r_E0,B_phi_E0");
    const std::vector<double> origin = split_row(lines[1]);
    REQUIRE(origin.size() == 5);
    CHECK(origin[0] == 0.0);            // r
    CHECK(origin[3] == 0.0);            // field vanishes on the lattice axis
    CHECK(origin[2] == doctest::Approx(-100.0).epsilon(1e-12)); // V(0) = -V0
}

TEST_CASE("cli: raman json output matches the in-process propagator") {
    const CliResult r = run_cli(
        "raman --omega-g 500 --delta 120 --gamma 10 --t-max 0.01 --n-t 5 --format json");
    CHECK(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc.at("format") == "rotor-table");
    CHECK(doc.at("version") == 1);
    CHECK(doc.at("command") == "raman");
    const json& rows = doc.at("rows");
    REQUIRE(rows.size() == 5);
    RamanConfig cfg;
    cfg.omega_g = 500.0;
    cfg.delta = 120.0;
    cfg.gamma = 10.0;
    for (int k = 0; k < 5; ++k) {
        const double t = 0.01 * k / 4.0;
        const RabiProbabilities pr = rabi_probabilities(cfg, t);
        CHECK(rows[k].at("t_s").get<double>() == doctest::Approx(t).epsilon(1e-15));
        CHECK(rows[k].at("P_up").get<double>() == doctest::Approx(pr.P_up).epsilon(1e-13));
        CHECK(rows[k].at("P_down").get<double>() == doctest::Approx(pr.P_down).epsilon(1e-13));
    }
}

TEST_CASE("cli: config file merging and flag precedence") {
    json cfg{{"format", "rotor-run"},
             {"version", 1},
             {"command", "raman"},
             {"atom", "6Li"},
             {"params",
              {{"omega_g_rad_s", 500.0}, {"delta_rad_s", 120.0}, {"gamma_rad_s", 10.0},
               {"t_max_s", 0.01}, {"n_t", 7}}}};
    const std::string path = write_file("raman_cfg.json", cfg.dump());

    const CliResult file_only = run_cli("raman --config " + path + " --no-header-timestamp");
    CHECK(file_only.code == 0);
    CHECK(data_lines(file_only.out).size() == 8); // header + n_t rows

    const CliResult flagged =
        run_cli("raman --config " + path + " --n-t 5 --no-header-timestamp");
    CHECK(flagged.code == 0);
    const std::vector<std::string> lines = data_lines(flagged.out);
    REQUIRE(lines.size() == 6); // flag override wins over the file
    CHECK(lines[1] == "0,1,0"); // starts in the up state

    // a config whose command disagrees with the subcommand is refused
    json density{{"format", "rotor-run"}, {"version", 1}, {"command", "density"}};
    const std::string dpath = write_file("density_cfg.json", density.dump());
    const CliResult mismatch = run_cli("spectrum --config " + dpath);
    CHECK(mismatch.code == 2);
    CHECK(mismatch.err.find("does not match") != std::string::npos);

    const CliResult absent = run_cli("raman --config " + scratch_dir() + "/nope.json");
    CHECK(absent.code == 2);
    const std::string garbled = write_file("garbled.json", "{nope");
    const CliResult invalid = run_cli("raman --config " + garbled);
    CHECK(invalid.code == 2);
    CHECK(invalid.err.find("not valid JSON") != std::string::npos);
}

TEST_CASE("cli: exit codes separate config, solver and measurement failures") {
    CHECK(run_cli("--help").code == 0);
    CHECK(run_cli("").code == 2);               // a subcommand is required
    CHECK(run_cli("warble").code == 2);         // unknown subcommand
    CHECK(run_cli("field --atom 5Li").code == 2);
    CHECK(run_cli("field --preset bogus").code == 2);
    CHECK(run_cli("field --format yaml").code == 2);
    CHECK(run_cli("raman --omega-g 0 --delta 0").code == 2); // no time scale
    CHECK(run_cli("classical --mode orbit").code == 2);

    const CliResult solver = run_cli("spectrum --n-points 100 --n-max 300 --zeta-max 0.5");
    CHECK(solver.code == 3);
    CHECK(solver.err.find("solver error") != std::string::npos);

    // nine consistent-looking splittings whose combined value is impossibly small
    const std::string cal = write_file("cal.json", calibration_to_json(published_cal()).dump());
    MeasurementSet impossible;
    impossible.delta0 = {0.0, 0.0, 0.0};
    impossible.delta1_n5 = {1000.0, 1000.0, 1000.0};
    impossible.delta1_n10 = {1000.0, 1000.0, 1000.0};
    std::ostringstream ss;
    write_measurements_csv(ss, impossible, false);
    const std::string meas = write_file("impossible.csv", ss.str());
    const CliResult inverted =
        run_cli("sense-invert --measurements " + meas + " --calibration " + cal);
    CHECK(inverted.code == 4);
    CHECK(inverted.err.find("measurement error") != std::string::npos);
}

TEST_CASE("cli: sensing round trip through files recovers the frame") {
    const std::string cal = write_file("cal_rt.json", calibration_to_json(published_cal()).dump());
    const std::string meas = scratch_dir() + "/meas_rt.csv";
    const std::string calout = scratch_dir() + "/cal_out.json";
    const CliResult fwd = run_cli(
        "sense-forward --calibration " + cal + " --calibration-out " + calout +
        " --B-ex 0.5e-9 -0.4e-9 0.3e-9 --Omega 0.3 -0.2 0.1 --accel 9.81 9.0 8.5 --out " + meas +
        " --no-header-timestamp");
    CHECK(fwd.code == 0);
    CHECK(json_close(json::parse(slurp(calout)), json::parse(slurp(cal))));

    const CliResult fwd2 = run_cli(
        "sense-forward --calibration " + cal +
        " --B-ex 0.5e-9 -0.4e-9 0.3e-9 --Omega 0.3 -0.2 0.1 --accel 9.81 9.0 8.5 --out " + meas +
        ".again --no-header-timestamp");
    CHECK(fwd2.code == 0);
    CHECK(slurp(meas + ".again") == slurp(meas)); // deterministic bytes

    const CliResult inv =
        run_cli("sense-invert --measurements " + meas + " --calibration " + cal);
    CHECK(inv.code == 0);
    const FrameState frame = frame_from_json(json::parse(inv.out));
    const std::array<double, 3> B{0.5e-9, -0.4e-9, 0.3e-9};
    const std::array<double, 3> Om{0.3, -0.2, 0.1};
    const std::array<double, 3> a{9.81, 9.0, 8.5};
    for (int i = 0; i < 3; ++i) {
        CHECK(frame.B_ex[i] == doctest::Approx(B[i]).epsilon(1e-9));
        CHECK(frame.Omega[i] == doctest::Approx(Om[i]).epsilon(1e-9));
        CHECK(frame.accel[i] == doctest::Approx(a[i]).epsilon(1e-9));
    }

    const CliResult missing = run_cli("sense-invert --calibration " + cal);
    CHECK(missing.code == 2); // measurements are mandatory
}

TEST_CASE("cli: budget with the stored calibration reproduces the quoted numbers") {
    const std::string cal = write_file("cal_budget.json",
                                       calibration_to_json(published_cal()).dump());
    const CliResult r = run_cli("budget --preset li6-paper --calibration " + cal);
    CHECK(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc.at("format") == "rotor-budget");
    const json& acc = doc.at("accuracy");
    CHECK(acc.at("omega_laser_rad_s").get<double>() == doctest::Approx(2.80806733e15).epsilon(1e-6));
    CHECK(acc.at("delta_B_over_B").get<double>() == doctest::Approx(2.70277892e-17).epsilon(1e-6));
    CHECK(acc.at("delta_a_over_a").get<double>() == doctest::Approx(1.00232124e-16).epsilon(1e-6));
    CHECK(acc.at("gyro_radiative_coeff_s2").get<double>() ==
          doctest::Approx(1.61434215e-44).epsilon(1e-6));
    CHECK(acc.at("delta_Omega_earth_rad_s").get<double>() ==
          doctest::Approx(6.20859068e-57).epsilon(1e-6));
    const json& shot = doc.at("shot_noise");
    CHECK(shot.at("delta_phi_rad").get<double>() == doctest::Approx(8.62250021e-13).epsilon(1e-6));
    CHECK(shot.at("delta_B_T").get<double>() == doctest::Approx(4.54062227e-24).epsilon(1e-6));
    CHECK(shot.at("delta_Omega_rad_s").get<double>() ==
          doctest::Approx(2.86987169e-14).epsilon(1e-6));
    CHECK(shot.at("delta_a_m_s2").get<double>() == doctest::Approx(4.57848587e-15).epsilon(1e-6));
    CHECK(doc.at("inputs").at("delta_omega_rad_s").get<double>() ==
          doctest::Approx(2.0 * kPi * 0.160).epsilon(1e-12));

    // without pulse inputs the shot-noise block is explicitly null
    const CliResult acc_only =
        run_cli("budget --delta-omega 1.0 --calibration " + cal + " --beta-sens 0.0377475 "
                "--rho-sens 0.139986");
    CHECK(acc_only.code == 0);
    CHECK(json::parse(acc_only.out).at("shot_noise").is_null());
}

TEST_CASE("cli: classical rings reproduce the reference orbit end to end") {
    const CliResult r =
        run_cli("classical --preset k40-classical --mode rings --no-header-timestamp");
    CHECK(r.code == 0);
    const std::vector<std::string> lines = data_lines(r.out);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "r_min_b0,r_max_b0,f_inner,f_outer,s_end_reduced,converged");
    const std::vector<double> row = split_row(lines[1]);
    REQUIRE(row.size() == 6);
    CHECK(row[0] == doctest::Approx(4.999048).epsilon(1e-5));
    CHECK(row[1] == doctest::Approx(6.614558).epsilon(1e-5));
    CHECK(row[2] == doctest::Approx(0.964541).epsilon(1e-5));
    CHECK(row[3] == doctest::Approx(1.0000031).epsilon(1e-5));
    CHECK(row[4] == 15.0);
    CHECK(row[5] == 1.0);
}

TEST_CASE("cli: classical trajectory row count follows the thinning") {
    const CliResult r = run_cli(
        "classical --preset k40-classical --s-end 2 --ds 1e-3 --store-every 100 "
        "--no-header-timestamp");
    CHECK(r.code == 0);
    const std::vector<std::string> lines = data_lines(r.out);
    REQUIRE(lines.size() == 22); // header + 2000/100 + 1 samples
    CHECK(lines[0] == "t,x,y,p_x,p_y,f_x,f_y,f_z");
    const std::vector<double> first = split_row(lines[1]);
    REQUIRE(first.size() == 8);
    CHECK(first[0] == 0.0);
    CHECK(first[1] == 5.0); // the preset initial condition
    CHECK(first[4] == -3.0);
}

TEST_CASE("cli: spectrum table carries the mirror doublet") {
    const CliResult r = run_cli(
        "spectrum --n-points 128 --n-max 1 --zeta-max 0.5 --r-max 1.2 --no-header-timestamp");
    CHECK(r.code == 0);
    const std::vector<std::string> lines = data_lines(r.out);
    REQUIRE(lines.size() == 3); // header + zeta = +-1/2
    CHECK(lines[0] == "n,zeta,energy_E0,beta_z,beta_par,rho_par_lambda0");
    const std::vector<double> up = split_row(lines[1]);
    const std::vector<double> down = split_row(lines[2]);
    REQUIRE(up.size() == 6);
    CHECK(std::abs(up[1]) == 0.5);
    CHECK(up[1] == -down[1]);
    CHECK(up[2] == doctest::Approx(down[2]).epsilon(1e-12)); // time-reversal pair
    CHECK(up[2] < 0.0);
    CHECK(r.out.find("grid_error_estimate_E0 = ") != std::string::npos);
}
