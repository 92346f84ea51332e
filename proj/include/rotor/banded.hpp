#pragma once

#include <vector>

namespace rotor {

// Symmetric banded matrix, lower storage. bands[b][i] holds A(i+b+1, i),
// so bands[0] is the first sub-diagonal and so on.
struct BandedSymmetric {
    int n = 0;
    std::vector<double> diag;
    std::vector<std::vector<double>> bands;

    int bandwidth() const { return static_cast<int>(bands.size()); }
    double at(int i, int j) const; // dense accessor, zero outside the band
};

// Number of eigenvalues strictly below `shift` (Sturm count via LDL^T inertia).
int eigen_count_below(const BandedSymmetric& A, double shift);

struct EigenPairs {
    std::vector<double> values;               // ascending
    std::vector<std::vector<double>> vectors; // unit 2-norm
};

// Lowest k eigenpairs by bisection plus inverse iteration. Eigenvalues are
// bisected to abs_tol; eigenvectors are inverse-iterated until the residual
// |A v - lambda v| drops below resid_tol * |A|_scale. Throws SolverError on
// failure to converge.
EigenPairs lowest_eigenpairs(const BandedSymmetric& A, int k,
                             double abs_tol = 1e-11, double resid_tol = 1e-12);

} // namespace rotor
