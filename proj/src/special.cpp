#include "oukit/special.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "oukit/errors.hpp"

namespace oukit {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

bool is_nonpositive_integer(double x) {
    return x <= 0.0 && std::abs(x - std::round(x)) < 1e-14 * std::max(1.0, std::abs(x));
}

bool is_integer(double x, double tol = 1e-9) { return std::abs(x - std::round(x)) < tol; }

double gamma_sign(double x) {
    if (x > 0.0) return 1.0;
    return (static_cast<long long>(std::floor(x)) % 2 == 0) ? 1.0 : -1.0;
}

// Neumaier compensated accumulator.
struct Accumulator {
    double sum = 0.0;
    double comp = 0.0;
    double abs_sum = 0.0;

    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
        abs_sum += std::abs(v);
    }
    double value() const { return sum + comp; }
};

struct SeriesOutcome {
    double value;
    double est_error;
};

// Plain 2F1 power series, valid for |x| < 1.
SeriesOutcome series_2f1(double a, double b, double c, double x) {
    Accumulator acc;
    double term = 1.0;
    acc.add(term);
    const long max_terms = 20'000'000;
    double tail = 0.0;
    for (long n = 0; n < max_terms; ++n) {
        const double dn = static_cast<double>(n);
        const double ratio = (a + dn) * (b + dn) / ((c + dn) * (dn + 1.0)) * x;
        term *= ratio;
        if (term == 0.0) break;
        acc.add(term);
        const double next_ratio =
            std::abs((a + dn + 1.0) * (b + dn + 1.0) / ((c + dn + 1.0) * (dn + 2.0)) * x);
        if (next_ratio < 1.0) {
            tail = std::abs(term) * next_ratio / (1.0 - next_ratio);
            if (tail <= 0.25 * kEps * std::abs(acc.value())) break;
        }
    }
    const double v = acc.value();
    return {v, tail + 4.0 * kEps * acc.abs_sum};
}

}  // namespace

const char* to_string(HyperMethod method) noexcept {
    switch (method) {
        case HyperMethod::series: return "series";
        case HyperMethod::connection: return "connection";
        case HyperMethod::asymptotic: return "asymptotic";
    }
    return "unknown";
}

cplx gamma_fn(cplx z) {
    if (z.imag() == 0.0) return {gamma_fn(z.real()), 0.0};
    if (z.real() < 0.5) {
        const double pi = std::numbers::pi;
        return pi / (std::sin(pi * z) * gamma_fn(1.0 - z));
    }
    static constexpr std::array<double, 9> p = {
        0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
        771.32342877765313,      -176.61502916214059,   12.507343278686905,
        -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
    constexpr double g = 7.0;
    const cplx zm = z - 1.0;
    cplx x = p[0];
    for (std::size_t i = 1; i < p.size(); ++i) x += p[i] / (zm + static_cast<double>(i));
    const cplx t = zm + g + 0.5;
    return std::sqrt(2.0 * std::numbers::pi) * std::exp((zm + 0.5) * std::log(t) - t) * x;
}

double gamma_fn(double x) {
    if (is_nonpositive_integer(x)) raise(ErrorCode::PoleHit, "Gamma evaluated at a non-positive integer");
    return std::tgamma(x);
}

double rgamma(double x) {
    if (is_nonpositive_integer(x)) return 0.0;
    return 1.0 / std::tgamma(x);
}

double gamma_ratio(double a, double b) {
    if (a > 0.0 && b > 0.0 && (a > 150.0 || b > 150.0)) {
        return std::exp(std::lgamma(a) - std::lgamma(b));
    }
    return gamma_fn(a) / gamma_fn(b);
}

namespace detail {

HypergeometricResult kummer_series(double a, double b, double z) {
    Accumulator acc;
    double term = 1.0;
    acc.add(term);
    double last = 0.0;
    for (int n = 0; n < 100000; ++n) {
        const double dn = n;
        term *= (a + dn) / (b + dn) * z / (dn + 1.0);
        if (term == 0.0) break;
        acc.add(term);
        last = std::abs(term);
        const double next_ratio = std::abs((a + dn + 1.0) / (b + dn + 1.0) * z / (dn + 2.0));
        if (next_ratio < 0.5 && last < 0.25 * kEps * std::abs(acc.value())) break;
    }
    const double v = acc.value();
    return {v, 4.0 * kEps * acc.abs_sum + last * kEps, HyperMethod::series};
}

HypergeometricResult kummer_asymptotic(double a, double b, double z, double log_scale) {
    // Gamma(b)/Gamma(a) e^z z^(a-b) sum_s (b-a)_s (1-a)_s / s! z^-s, optimally truncated.
    Accumulator acc;
    double term = 1.0;
    acc.add(term);
    double omitted = 0.0;
    for (int s = 0; s < 200; ++s) {
        const double ds = s;
        const double next = term * (b - a + ds) * (1.0 - a + ds) / ((ds + 1.0) * z);
        if (next == 0.0) {
            omitted = 0.0;
            break;
        }
        if (std::abs(next) > std::abs(term) && s >= 3) {
            omitted = std::abs(next);
            break;
        }
        term = next;
        acc.add(term);
        omitted = std::abs(term);
        if (std::abs(term) < 0.25 * kEps * std::abs(acc.value()) && s >= 3) break;
    }
    const double log_pref = (z + log_scale) + std::lgamma(b) - std::lgamma(a) + (a - b) * std::log(z);
    const double sign = gamma_sign(b) * gamma_sign(a);
    const double pref = sign * std::exp(log_pref);
    const double v = pref * acc.value();
    const double err = std::abs(pref) * (omitted + 4.0 * kEps * acc.abs_sum) + 8.0 * kEps * std::abs(v) * (1.0 + z * kEps);
    return {v, err, HyperMethod::asymptotic};
}

}  // namespace detail

HypergeometricResult kummer_1f1(double a, double b, double z) {
    if (is_nonpositive_integer(b)) raise(ErrorCode::ParameterPole, "1F1 with non-positive integer b");
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(z)) {
        raise(ErrorCode::InvalidInput, "1F1 with non-finite argument");
    }
    if (z == 0.0) return {1.0, 0.0, HyperMethod::series};
    if (is_nonpositive_integer(a)) return detail::kummer_series(a, b, z);
    if (z < 0.0) {
        // Beyond the range of exp(-z) the factor e^z is folded into the asymptotic prefactor.
        if (-z >= 690.0 && !is_nonpositive_integer(b - a)) {
            const HypergeometricResult r = detail::kummer_asymptotic(b - a, b, -z, z);
            return {r.value, r.est_error, HyperMethod::connection};
        }
        HypergeometricResult r = kummer_1f1(b - a, b, -z);
        const double e = std::exp(z);
        return {r.value * e, r.est_error * e + kEps * std::abs(r.value.real() * e), HyperMethod::connection};
    }
    if (z <= 30.0) return detail::kummer_series(a, b, z);
    HypergeometricResult asym = detail::kummer_asymptotic(a, b, z);
    if (asym.est_error <= 1e-13 * std::abs(asym.value)) return asym;
    if (z < 690.0) return detail::kummer_series(a, b, z);
    return asym;
}

HypergeometricResult gauss_2f1(double a, double b, double c, double z) {
    if (is_nonpositive_integer(c)) raise(ErrorCode::ParameterPole, "2F1 with non-positive integer b1");
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(z)) {
        raise(ErrorCode::InvalidInput, "2F1 with non-finite argument");
    }
    if (z > 0.0) raise(ErrorCode::InvalidInput, "2F1 is only provided for z <= 0");
    if (z == 0.0) return {1.0, 0.0, HyperMethod::series};

    if (is_nonpositive_integer(a) || is_nonpositive_integer(b)) {
        SeriesOutcome s = series_2f1(a, b, c, z);
        return {s.value, s.est_error, HyperMethod::series};
    }
    if (a == c) {
        const double v = std::pow(1.0 - z, -b);
        return {v, 4.0 * kEps * std::abs(v), HyperMethod::series};
    }
    if (b == c) {
        const double v = std::pow(1.0 - z, -a);
        return {v, 4.0 * kEps * std::abs(v), HyperMethod::series};
    }

    const double w = z / (z - 1.0);
    auto pfaff = [&]() -> HypergeometricResult {
        // Pick the Pfaff variant whose series decays fastest (or terminates).
        bool first = (a - b) <= 0.0;
        if (is_nonpositive_integer(c - b)) first = true;
        else if (is_nonpositive_integer(c - a)) first = false;
        if (first) {
            SeriesOutcome s = series_2f1(a, c - b, c, w);
            const double pref = std::pow(1.0 - z, -a);
            return {pref * s.value, std::abs(pref) * s.est_error, HyperMethod::series};
        }
        SeriesOutcome s = series_2f1(c - a, b, c, w);
        const double pref = std::pow(1.0 - z, -b);
        return {pref * s.value, std::abs(pref) * s.est_error, HyperMethod::series};
    };

    if (z >= -3.0 || is_integer(a - b, 1e-6)) return pfaff();

    // Argument inversion z -> 1/z for z < -3.
    const double x = 1.0 / z;
    const double mz = -z;
    const double gc = gamma_fn(c);
    const double c1 = gc * gamma_fn(b - a) * rgamma(b) * rgamma(c - a);
    const double c2 = gc * gamma_fn(a - b) * rgamma(a) * rgamma(c - b);
    double v = 0.0;
    double err = 0.0;
    if (c1 != 0.0) {
        SeriesOutcome s = series_2f1(a, a - c + 1.0, a - b + 1.0, x);
        const double t = c1 * std::pow(mz, -a);
        v += t * s.value;
        err += std::abs(t) * (s.est_error + 8.0 * kEps * std::abs(s.value));
    }
    if (c2 != 0.0) {
        SeriesOutcome s = series_2f1(b, b - c + 1.0, b - a + 1.0, x);
        const double t = c2 * std::pow(mz, -b);
        v += t * s.value;
        err += std::abs(t) * (s.est_error + 8.0 * kEps * std::abs(s.value));
    }
    return {v, err, HyperMethod::connection};
}

double gaussian_moment_integral(double n, double r) {
    if (!(n > -1.0)) raise(ErrorCode::InvalidInput, "gaussian_moment_integral requires n > -1");
    const double q = 0.25 * r * r;
    const double t1 = 0.5 * gamma_fn(0.5 * (n + 1.0)) * kummer_1f1(0.5 * (n + 1.0), 0.5, q).real();
    const double t2 = 0.5 * r * gamma_fn(0.5 * n + 1.0) * kummer_1f1(0.5 * n + 1.0, 1.5, q).real();
    return t1 + t2;
}

double radial_gaussian_integral(double n, double z) {
    if (!(n > 0.0) || !(z > 0.0)) raise(ErrorCode::InvalidInput, "radial_gaussian_integral requires n, z > 0");
    return 0.5 * gamma_fn(0.5 * n) * std::pow(z, -0.5 * n);
}

double sphere_area(int d) {
    if (d < 1) raise(ErrorCode::InvalidInput, "sphere_area requires d >= 1");
    return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

}  // namespace oukit
