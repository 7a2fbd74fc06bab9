#pragma once

#include <complex>

namespace oukit {

using cplx = std::complex<double>;

enum class HyperMethod { series, connection, asymptotic };

const char* to_string(HyperMethod method) noexcept;

struct HypergeometricResult {
    cplx value;
    double est_error = 0.0;
    HyperMethod method = HyperMethod::series;

    double real() const { return value.real(); }
};

/// Gamma function on the complex plane. Throws PoleHit at non-positive integers.
cplx gamma_fn(cplx z);

/// Real gamma function, PoleHit at non-positive integers.
double gamma_fn(double x);

/// 1/Gamma(x), zero at the poles of Gamma.
double rgamma(double x);

/// Gamma(a)/Gamma(b) for positive a, b without intermediate overflow.
double gamma_ratio(double a, double b);

/// Kummer 1F1(a; b; z). Series up to z = 30, asymptotic expansion beyond,
/// Kummer transformation for z < 0.
HypergeometricResult kummer_1f1(double a, double b, double z);

/// Gauss 2F1(a1, a2; b1; z) for z <= 0.
HypergeometricResult gauss_2f1(double a1, double a2, double b1, double z);

/// Closed form of  int_0^inf s^n exp(-s^2 + r s) ds  through two Kummer functions.
double gaussian_moment_integral(double n, double r);

/// int_0^inf r^(n-1) exp(-z r^2) dr = Gamma(n/2) z^(-n/2) / 2.
double radial_gaussian_integral(double n, double z);

/// Surface area of the unit sphere in R^d.
double sphere_area(int d);

namespace detail {
HypergeometricResult kummer_series(double a, double b, double z);
/// log_scale is added to the exponent of the prefactor.
HypergeometricResult kummer_asymptotic(double a, double b, double z, double log_scale = 0.0);
}  // namespace detail

}  // namespace oukit
