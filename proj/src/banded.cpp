#include "rotor/banded.hpp"
#include "rotor/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <string>

namespace rotor {

double BandedSymmetric::at(int i, int j) const {
    if (i < j) std::swap(i, j);
    if (i == j) return diag[static_cast<size_t>(i)];
    const int b = i - j - 1;
    if (b >= bandwidth()) return 0.0;
    return bands[static_cast<size_t>(b)][static_cast<size_t>(j)];
}

namespace {

// Infinity-norm scale of the matrix, used for relative tolerances.
double matrix_scale(const BandedSymmetric& A) {
    double s = 0.0;
    for (int i = 0; i < A.n; ++i) {
        double row = std::abs(A.diag[static_cast<size_t>(i)]);
        for (int b = 0; b < A.bandwidth(); ++b) {
            const int j = i - b - 1;
            if (j >= 0) row += std::abs(A.bands[static_cast<size_t>(b)][static_cast<size_t>(j)]);
            if (i + b + 1 < A.n) row += std::abs(A.bands[static_cast<size_t>(b)][static_cast<size_t>(i)]);
        }
        s = std::max(s, row);
    }
    return s;
}

// In-place banded LDL^T of (A - shift I). lbands mirrors the layout of
// A.bands for the unit lower factor; d receives the pivots. Zero pivots are
// nudged so Sturm counts and inverse-iteration solves stay finite.
void ldlt_factor(const BandedSymmetric& A, double shift,
                 std::vector<double>& d, std::vector<std::vector<double>>& lbands,
                 double pivot_floor) {
    const int n = A.n;
    const int w = A.bandwidth();
    d.assign(static_cast<size_t>(n), 0.0);
    lbands.assign(static_cast<size_t>(w), {});
    for (int b = 0; b < w; ++b)
        lbands[static_cast<size_t>(b)].assign(static_cast<size_t>(std::max(0, n - b - 1)), 0.0);

    for (int j = 0; j < n; ++j) {
        double dj = A.diag[static_cast<size_t>(j)] - shift;
        for (int k = std::max(0, j - w); k < j; ++k) {
            const double ljk = lbands[static_cast<size_t>(j - k - 1)][static_cast<size_t>(k)];
            dj -= ljk * ljk * d[static_cast<size_t>(k)];
        }
        if (std::abs(dj) < pivot_floor) dj = (dj < 0.0) ? -pivot_floor : pivot_floor;
        d[static_cast<size_t>(j)] = dj;
        for (int i = j + 1; i < std::min(n, j + w + 1); ++i) {
            double lij = A.at(i, j);
            for (int k = std::max(0, i - w); k < j; ++k) {
                lij -= lbands[static_cast<size_t>(i - k - 1)][static_cast<size_t>(k)] *
                       lbands[static_cast<size_t>(j - k - 1)][static_cast<size_t>(k)] *
                       d[static_cast<size_t>(k)];
            }
            lbands[static_cast<size_t>(i - j - 1)][static_cast<size_t>(j)] = lij / dj;
        }
    }
}

// Solve (L D L^T) x = b in place.
void ldlt_solve(const std::vector<double>& d, const std::vector<std::vector<double>>& lbands,
                std::vector<double>& x) {
    const int n = static_cast<int>(d.size());
    const int w = static_cast<int>(lbands.size());
    for (int j = 0; j < n; ++j) {
        double xj = x[static_cast<size_t>(j)];
        for (int k = std::max(0, j - w); k < j; ++k)
            xj -= lbands[static_cast<size_t>(j - k - 1)][static_cast<size_t>(k)] * x[static_cast<size_t>(k)];
        x[static_cast<size_t>(j)] = xj;
    }
    for (int j = 0; j < n; ++j) x[static_cast<size_t>(j)] /= d[static_cast<size_t>(j)];
    for (int j = n - 1; j >= 0; --j) {
        double xj = x[static_cast<size_t>(j)];
        for (int i = j + 1; i < std::min(n, j + w + 1); ++i)
            xj -= lbands[static_cast<size_t>(i - j - 1)][static_cast<size_t>(j)] * x[static_cast<size_t>(i)];
        x[static_cast<size_t>(j)] = xj;
    }
}

void matvec(const BandedSymmetric& A, const std::vector<double>& x, std::vector<double>& y) {
    const int n = A.n;
    const int w = A.bandwidth();
    y.assign(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double yi = A.diag[static_cast<size_t>(i)] * x[static_cast<size_t>(i)];
        for (int b = 0; b < w; ++b) {
            const int j = i - b - 1;
            if (j >= 0)
                yi += A.bands[static_cast<size_t>(b)][static_cast<size_t>(j)] * x[static_cast<size_t>(j)];
            if (i + b + 1 < n)
                yi += A.bands[static_cast<size_t>(b)][static_cast<size_t>(i)] * x[static_cast<size_t>(i + b + 1)];
        }
        y[static_cast<size_t>(i)] = yi;
    }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

} // namespace

int eigen_count_below(const BandedSymmetric& A, double shift) {
    if (A.n <= 0) throw SolverError("eigen_count_below: empty matrix");
    const double scale = matrix_scale(A);
    std::vector<double> d;
    std::vector<std::vector<double>> lbands;
    ldlt_factor(A, shift, d, lbands, 1e-300 + scale * 1e-18);
    int count = 0;
    for (double p : d)
        if (p < 0.0) ++count;
    return count;
}

EigenPairs lowest_eigenpairs(const BandedSymmetric& A, int k, double abs_tol, double resid_tol) {
    if (A.n <= 0 || k <= 0 || k > A.n) throw SolverError("lowest_eigenpairs: bad dimensions");
    const int n = A.n;
    const double scale = matrix_scale(A);

    // Gershgorin bracket for the whole spectrum.
    double lo = A.diag[0], hi = A.diag[0];
    for (int i = 0; i < n; ++i) {
        double radius = 0.0;
        for (int b = 0; b < A.bandwidth(); ++b) {
            const int j = i - b - 1;
            if (j >= 0) radius += std::abs(A.bands[static_cast<size_t>(b)][static_cast<size_t>(j)]);
            if (i + b + 1 < n) radius += std::abs(A.bands[static_cast<size_t>(b)][static_cast<size_t>(i)]);
        }
        lo = std::min(lo, A.diag[static_cast<size_t>(i)] - radius);
        hi = std::max(hi, A.diag[static_cast<size_t>(i)] + radius);
    }
    lo -= 1.0;
    hi += 1.0;

    EigenPairs out;
    out.values.reserve(static_cast<size_t>(k));
    out.vectors.reserve(static_cast<size_t>(k));

    std::vector<double> d, work, resid;
    std::vector<std::vector<double>> lbands;

    for (int j = 0; j < k; ++j) {
        // Bisection on the Sturm count for the j-th smallest eigenvalue.
        double a = (j == 0) ? lo : out.values.back();
        double b = hi;
        if (eigen_count_below(A, a) > j) a = lo;
        for (int iter = 0; iter < 200 && (b - a) > abs_tol; ++iter) {
            const double mid = 0.5 * (a + b);
            if (eigen_count_below(A, mid) >= j + 1)
                b = mid;
            else
                a = mid;
        }
        if ((b - a) > 2.0 * abs_tol)
            throw SolverError("lowest_eigenpairs: bisection failed to converge");
        const double lambda = 0.5 * (a + b);

        // Inverse iteration at a slightly offset shift.
        ldlt_factor(A, lambda + 0.3 * abs_tol, d, lbands, 1e-300 + scale * 1e-18);
        std::mt19937_64 rng(0x5eed0000u + static_cast<unsigned>(j));
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        std::vector<double> v(static_cast<size_t>(n));
        for (double& x : v) x = uni(rng);

        bool converged = false;
        for (int iter = 0; iter < 60; ++iter) {
            ldlt_solve(d, lbands, v);
            for (const auto& prev : out.vectors) {
                const double c = dot(prev, v);
                for (size_t i = 0; i < v.size(); ++i) v[i] -= c * prev[i];
            }
            const double nv = norm2(v);
            if (!(nv > 0.0) || !std::isfinite(nv))
                throw SolverError("lowest_eigenpairs: inverse iteration broke down");
            for (double& x : v) x /= nv;

            matvec(A, v, work);
            const double rq = dot(v, work);
            resid = work;
            for (size_t i = 0; i < v.size(); ++i) resid[i] -= rq * v[i];
            if (norm2(resid) <= resid_tol * scale + 1e-300) {
                converged = true;
                break;
            }
        }
        if (!converged)
            throw SolverError("lowest_eigenpairs: eigenvector residual did not converge for index " +
                              std::to_string(j));

        out.values.push_back(lambda);
        out.vectors.push_back(v);
    }
    return out;
}

} // namespace rotor
