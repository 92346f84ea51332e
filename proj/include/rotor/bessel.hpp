#pragma once

namespace rotor {

// Cylindrical Bessel functions of the first kind, self-contained.
// Relative accuracy better than 1e-12 on [0, 20] (power series below x = 8,
// trapezoid evaluation of Bessel's integral above).
double bessel_j0(double x);
double bessel_j1(double x);

} // namespace rotor
