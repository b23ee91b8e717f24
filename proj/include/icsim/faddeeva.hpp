#pragma once

#include <complex>

namespace icsim {

// Faddeeva function w(z) = exp(-z^2) erfc(-iz) for Im(z) >= 0.
// Trapezoidal summation with pole correction in the interior, Laplace
// continued fraction for large |z|; relative accuracy better than 1e-9
// (verified against adaptive quadrature in the test suite).
std::complex<double> faddeeva_w(std::complex<double> z);

// Voigt profile normalized to unit area: the convolution of a Gaussian of
// standard deviation sigma with a Lorentzian of half-width gamma, evaluated
// at detuning x from line center.
double voigt_function(double x, double sigma, double gamma);

} // namespace icsim
