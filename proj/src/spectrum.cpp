#include "rotor/spectrum.hpp"
#include "rotor/constants.hpp"
#include "rotor/errors.hpp"
#include "rotor/field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rotor {

namespace {

constexpr double kInvFourPiSq = 1.0 / (4.0 * kPi * kPi); // hbar^2/2M in natural units

bool is_half_integer(double x) {
    return std::abs(2.0 * x - std::round(2.0 * x)) < 1e-9;
}

// Fix the overall sign: make psi_up positive at its first significant
// local maximum of |psi_up| so that levels are comparable across runs.
void fix_sign(std::vector<double>& up, std::vector<double>& down) {
    double amax = 0.0;
    for (double v : up) amax = std::max(amax, std::abs(v));
    if (amax == 0.0) {
        for (double v : down) amax = std::max(amax, std::abs(v));
        if (amax == 0.0) return;
        // Degenerate case: no up amplitude, pin the down channel instead.
        for (size_t i = 0; i < down.size(); ++i) {
            if (std::abs(down[i]) >= 0.05 * amax) {
                if (down[i] < 0.0)
                    for (size_t k = 0; k < down.size(); ++k) down[k] = -down[k];
                return;
            }
        }
        return;
    }
    const double thresh = 0.05 * amax;
    size_t pick = 0;
    bool found = false;
    for (size_t i = 1; i + 1 < up.size(); ++i) {
        const double a = std::abs(up[i]);
        if (a >= thresh && a >= std::abs(up[i - 1]) && a >= std::abs(up[i + 1])) {
            pick = i;
            found = true;
            break;
        }
    }
    if (!found) {
        for (size_t i = 0; i < up.size(); ++i)
            if (std::abs(up[i]) > std::abs(up[pick])) pick = i;
    }
    if (up[pick] < 0.0) {
        for (size_t k = 0; k < up.size(); ++k) up[k] = -up[k];
        for (size_t k = 0; k < down.size(); ++k) down[k] = -down[k];
    }
}

struct ZetaBlock {
    double zeta;
    std::vector<double> energies;
    std::vector<std::vector<double>> up;
    std::vector<std::vector<double>> down;
};

ZetaBlock solve_block(const LatticeSpec& spec, double zeta, const RadialGrid& grid, int n_max) {
    const BandedSymmetric H = assemble_hamiltonian(spec, zeta, grid);
    const EigenPairs pairs = lowest_eigenpairs(H, n_max);
    const double h = grid.spacing();
    const double inv_sqrt_h = 1.0 / std::sqrt(h);

    ZetaBlock block;
    block.zeta = zeta;
    for (int n = 0; n < n_max; ++n) {
        const std::vector<double>& v = pairs.vectors[static_cast<size_t>(n)];
        std::vector<double> up(static_cast<size_t>(grid.n_points));
        std::vector<double> down(static_cast<size_t>(grid.n_points));
        for (int i = 0; i < grid.n_points; ++i) {
            up[static_cast<size_t>(i)] = v[static_cast<size_t>(2 * i)] * inv_sqrt_h;
            down[static_cast<size_t>(i)] = v[static_cast<size_t>(2 * i + 1)] * inv_sqrt_h;
        }
        fix_sign(up, down);
        block.energies.push_back(pairs.values[static_cast<size_t>(n)]);
        block.up.push_back(std::move(up));
        block.down.push_back(std::move(down));
    }
    return block;
}

} // namespace

std::vector<double> RadialGrid::radii() const {
    std::vector<double> r(static_cast<size_t>(n_points));
    const double h = spacing();
    for (int i = 0; i < n_points; ++i) r[static_cast<size_t>(i)] = (i + 1) * h;
    return r;
}

void validate(const RadialGrid& grid) {
    if (!(grid.r_max > 0.0)) throw ConfigError("radial grid: r_max must be positive");
    if (grid.n_points < 100) throw ConfigError("radial grid: need at least 100 interior points");
}

const RadialLevel& SpectrumResult::level(int n, double zeta) const {
    for (const RadialLevel& lvl : levels)
        if (lvl.n == n && std::abs(lvl.zeta - zeta) < 0.25) return lvl;
    throw ConfigError("spectrum: level (n=" + std::to_string(n) +
                      ", zeta=" + std::to_string(zeta) + ") was not computed");
}

BandedSymmetric assemble_hamiltonian(const LatticeSpec& spec, double zeta, const RadialGrid& grid) {
    validate(spec);
    validate(grid);
    if (!is_half_integer(zeta)) throw ConfigError("assemble_hamiltonian: zeta must be half-integer");

    const int N = grid.n_points;
    const double h = grid.spacing();
    const double t = kInvFourPiSq / (h * h); // hopping, E0 units

    BandedSymmetric H;
    H.n = 2 * N;
    H.diag.assign(static_cast<size_t>(2 * N), 0.0);
    H.bands.assign(2, {});
    H.bands[0].assign(static_cast<size_t>(2 * N - 1), 0.0);
    H.bands[1].assign(static_cast<size_t>(2 * N - 2), 0.0);

    for (int i = 0; i < N; ++i) {
        const double r = (i + 1) * h;
        const double V = isotropic_V(spec, r);
        const double B = isotropic_B(spec, r);
        const double C = kInvFourPiSq / (r * r); // angular kinetic scale
        H.diag[static_cast<size_t>(2 * i)] = 2.0 * t + V - 0.5 * B + zeta * zeta * C;
        H.diag[static_cast<size_t>(2 * i + 1)] = 2.0 * t + V + 0.5 * B + zeta * zeta * C;
        H.bands[0][static_cast<size_t>(2 * i)] = -zeta * C; // spin flip at r_i
        if (i + 1 < N) {
            H.bands[1][static_cast<size_t>(2 * i)] = -t;     // up-channel hop
            H.bands[1][static_cast<size_t>(2 * i + 1)] = -t; // down-channel hop
        }
    }
    return H;
}

SpectrumResult solve_spectrum(const LatticeSpec& spec, int n_max, double zeta_max, RadialGrid grid,
                              double refine_tol) {
    validate(spec);
    validate(grid);
    if (n_max < 1) throw ConfigError("solve_spectrum: n_max must be at least 1");
    if (!(zeta_max >= 0.5)) throw ConfigError("solve_spectrum: zeta_max must be at least 1/2");

    std::vector<double> zetas;
    for (double z = 0.5; z <= zeta_max + 1e-9; z += 1.0) zetas.push_back(z);

    auto solve_all = [&](const RadialGrid& g) {
        std::vector<ZetaBlock> blocks;
        for (double z : zetas) {
            blocks.push_back(solve_block(spec, z, g, n_max));
            blocks.push_back(solve_block(spec, -z, g, n_max));
        }
        return blocks;
    };
    auto max_shift = [&](const std::vector<ZetaBlock>& a, const std::vector<ZetaBlock>& b) {
        double err = 0.0;
        for (size_t k = 0; k < a.size(); ++k)
            for (int n = 0; n < n_max; ++n)
                err = std::max(err, std::abs(a[k].energies[static_cast<size_t>(n)] -
                                             b[k].energies[static_cast<size_t>(n)]));
        return err;
    };

    RadialGrid base = grid;
    std::vector<ZetaBlock> base_blocks = solve_all(base);
    RadialGrid doubled = base;
    doubled.n_points = 2 * doubled.n_points + 1; // halves the spacing, keeps shared nodes
    std::vector<ZetaBlock> doubled_blocks = solve_all(doubled);
    double err = max_shift(base_blocks, doubled_blocks);

    if (refine_tol > 0.0) {
        const int max_doublings = 3;
        int pass = 1;
        while (err >= refine_tol) {
            if (pass >= max_doublings)
                throw SolverError("solve_spectrum: eigenvalues still change by " +
                                  std::to_string(err) + " E0 after grid refinement");
            base = doubled;
            base_blocks = std::move(doubled_blocks);
            doubled.n_points = 2 * doubled.n_points + 1;
            doubled_blocks = solve_all(doubled);
            err = max_shift(base_blocks, doubled_blocks);
            ++pass;
        }
        base = doubled;             // gated mode reports the finest grid
        base_blocks = std::move(doubled_blocks);
    }

    SpectrumResult result;
    result.spec = spec;
    result.grid = base;
    result.grid_error_estimate = err;
    for (const ZetaBlock& block : base_blocks) {
        for (int n = 0; n < n_max; ++n) {
            RadialLevel lvl;
            lvl.n = n;
            lvl.zeta = block.zeta;
            lvl.energy = block.energies[static_cast<size_t>(n)];
            lvl.psi_up = block.up[static_cast<size_t>(n)];
            lvl.psi_down = block.down[static_cast<size_t>(n)];
            result.levels.push_back(std::move(lvl));
        }
    }
    return result;
}

double areal_density(const SpectrumResult& result, int n, double zeta, double r) {
    if (!(r > 0.0) || !(r < result.grid.r_max))
        throw ConfigError("areal_density: r must lie inside (0, r_max)");
    const RadialLevel& lvl = result.level(n, zeta);
    const double h = result.grid.spacing();
    const int N = result.grid.n_points;
    // Interpolate psi linearly; grid nodes are r_i = i*h for i = 1..N, with
    // psi = 0 at both Dirichlet ends.
    const double s = r / h;
    const int i = std::min(static_cast<int>(std::floor(s)), N);
    const double frac = s - i;
    auto value = [&](const std::vector<double>& psi, int idx) {
        if (idx <= 0 || idx > N) return 0.0;
        return psi[static_cast<size_t>(idx - 1)];
    };
    const double up = (1.0 - frac) * value(lvl.psi_up, i) + frac * value(lvl.psi_up, i + 1);
    const double down = (1.0 - frac) * value(lvl.psi_down, i) + frac * value(lvl.psi_down, i + 1);
    return (up * up + down * down) / (2.0 * kPi * r);
}

double density_peak_radius(const SpectrumResult& result, int n, double zeta) {
    const RadialLevel& lvl = result.level(n, zeta);
    const double h = result.grid.spacing();
    const int N = result.grid.n_points;
    std::vector<double> rho(static_cast<size_t>(N));
    for (int i = 0; i < N; ++i) {
        const double r = (i + 1) * h;
        const double u = lvl.psi_up[static_cast<size_t>(i)];
        const double d = lvl.psi_down[static_cast<size_t>(i)];
        rho[static_cast<size_t>(i)] = (u * u + d * d) / (2.0 * kPi * r);
    }
    int imax = 0;
    for (int i = 1; i < N; ++i)
        if (rho[static_cast<size_t>(i)] > rho[static_cast<size_t>(imax)]) imax = i;
    if (imax == 0 || imax == N - 1) return (imax + 1) * h;
    const double ym = rho[static_cast<size_t>(imax - 1)];
    const double y0 = rho[static_cast<size_t>(imax)];
    const double yp = rho[static_cast<size_t>(imax + 1)];
    const double denom = ym - 2.0 * y0 + yp;
    double shift = 0.0;
    if (denom != 0.0) shift = 0.5 * (ym - yp) / denom;
    return (imax + 1 + shift) * h;
}

OverlapIntegrals overlap_integrals(const SpectrumResult& result, int n, double zeta) {
    const RadialLevel& lvl = result.level(n, zeta);
    const double h = result.grid.spacing();
    OverlapIntegrals out;
    for (int i = 0; i < result.grid.n_points; ++i) {
        const double r = (i + 1) * h;
        const double u = lvl.psi_up[static_cast<size_t>(i)];
        const double d = lvl.psi_down[static_cast<size_t>(i)];
        out.beta_z += u * d;
        out.beta_par += 0.5 * (u * u - d * d);
        out.rho_par += (u * u + d * d) * r;
    }
    out.beta_z *= h;
    out.beta_par *= h;
    out.rho_par *= h;
    return out;
}

ExoticExpectations exotic_expectations(const SpectrumResult& result, int n, double zeta) {
    const OverlapIntegrals ov = overlap_integrals(result, n, zeta);
    ExoticExpectations out;
    out.mean_Fz = ov.beta_z;
    out.mean_lz = zeta - ov.beta_z;
    out.mean_lz2 = zeta * zeta + 0.25 - 2.0 * zeta * ov.beta_z;
    return out;
}

LossRates loss_rates(const SpectrumResult& result, int n, double zeta, double mass_kg,
                     double gamma_hf, double Delta_hf) {
    const RadialLevel& lvl = result.level(n, zeta);
    const LatticeSpec& spec = result.spec;
    const double h = result.grid.spacing();

    // integral (V + sigma B) psi_sigma^2 dr summed over both channels, E0 units
    double quad = 0.0;
    for (int i = 0; i < result.grid.n_points; ++i) {
        const double r = (i + 1) * h;
        const double V = isotropic_V(spec, r);
        const double B = isotropic_B(spec, r);
        const double u = lvl.psi_up[static_cast<size_t>(i)];
        const double d = lvl.psi_down[static_cast<size_t>(i)];
        quad += (V + 0.5 * B) * u * u + (V - 0.5 * B) * d * d;
    }
    quad *= h;

    const double E0_J = recoil_energy_J(mass_kg, spec.lambda0);
    const double quad_rad_per_s = quad * E0_J / kHbar;

    LossRates out;
    if (spec.gamma_e != 0.0) {
        if (spec.detuning_Delta == 0.0)
            throw SingularityError("loss_rates: detuning Delta must be nonzero");
        out.Gamma_ground = 0.5 * (spec.gamma_e / spec.detuning_Delta) * quad_rad_per_s;
    }
    if (gamma_hf != 0.0) {
        if (Delta_hf == 0.0)
            throw SingularityError("loss_rates: hyperfine detuning Delta_hf must be nonzero");
        out.Gamma_hyperfine = (gamma_hf / Delta_hf) * quad_rad_per_s;
    }
    out.hyperfine_negligible = std::abs(out.Gamma_hyperfine) < 0.01 * std::abs(out.Gamma_ground);
    return out;
}

} // namespace rotor
