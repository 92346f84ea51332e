#include "rotor/bessel.hpp"
#include "rotor/constants.hpp"

#include <cmath>
#include <cstdlib>

namespace rotor {

namespace {

// Ascending power series J_n(x) = (x/2)^n sum_k (-x^2/4)^k / (k! (k+n)!).
// Safe for |x| < ~8 where the alternating terms do not cancel badly.
double series_jn(int n, double x) {
    const double q = -0.25 * x * x;
    double term = (n == 0) ? 1.0 : 0.5 * x;
    double sum = term;
    for (int k = 1; k < 80; ++k) {
        term *= q / (static_cast<double>(k) * (k + n));
        sum += term;
        if (std::fabs(term) < 1e-18 * std::fabs(sum) + 1e-300) break;
    }
    return sum;
}

// Bessel's integral J_n(x) = (1/pi) int_0^pi cos(n t - x sin t) dt.
// The integrand has vanishing odd derivatives at both endpoints, so the
// trapezoid rule converges faster than any power of the step.
double integral_jn(int n, double x) {
    const int m = 64 + 2 * static_cast<int>(std::ceil(std::fabs(x)));
    const double h = kPi / m;
    double sum = 0.5 * (std::cos(0.0) + std::cos(n * kPi - x * std::sin(kPi)));
    for (int i = 1; i < m; ++i) {
        const double t = i * h;
        sum += std::cos(n * t - x * std::sin(t));
    }
    return sum * h / kPi;
}

double jn(int n, double x) {
    const double ax = std::fabs(x);
    double v = (ax < 8.0) ? series_jn(n, ax) : integral_jn(n, ax);
    if (x < 0.0 && n == 1) v = -v; // J1 is odd, J0 even
    return v;
}

} // namespace

double bessel_j0(double x) { return jn(0, x); }
double bessel_j1(double x) { return jn(1, x); }

} // namespace rotor
