#include <doctest.h>

#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <cmath>

#include "oukit/errors.hpp"
#include "oukit/special.hpp"

using namespace oukit;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }
double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("gamma against mpmath") {
    CHECK(rel(gamma_fn(3.7), 4.1706517837966040301) < 1e-13);
    CHECK(rel(gamma_fn(10.3), 716430.68906237640663) < 1e-13);
    CHECK(rel(gamma_fn(47.5), 3.76238821188725875e58) < 1e-13);
    CHECK(rel(gamma_fn(0.5001), 1.7721059056999203716) < 1e-13);
    CHECK(rel(gamma_fn(-1.5), 2.3632718012073547031) < 1e-13);
    CHECK(rel(gamma_fn(cplx(1.0, 1.0)), cplx(0.49801566811835604271, -0.15494982830181068512)) < 1e-13);
    CHECK(rel(gamma_fn(cplx(2.5, 3.0)), cplx(-0.21811897108112289748, 0.072034763407175033565)) < 1e-13);
}

TEST_CASE("gamma poles") {
    CHECK_THROWS_AS(gamma_fn(0.0), Error);
    CHECK_THROWS_AS(gamma_fn(-3.0), Error);
    try {
        gamma_fn(-2.0);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::PoleHit);
    }
    CHECK(rgamma(-2.0) == 0.0);
}

TEST_CASE("gamma ratio") {
    CHECK(rel(gamma_ratio(47.5, 46.0), gamma_fn(47.5) / gamma_fn(46.0)) < 1e-12);
    CHECK(rel(gamma_ratio(200.5, 200.0), std::exp(std::lgamma(200.5) - std::lgamma(200.0))) < 1e-11);
}

TEST_CASE("kummer 1F1 against mpmath") {
    struct Case {
        double a, b, z, v;
    };
    const Case cases[] = {
        {0.5, 1.5, 2.0, 2.3644538928052092846},     {2.5, 0.5, 10.0, 3839947.2035613042461},
        {1.5, 0.5, 29.9, 587906941749812.29562},    {3.0, 1.5, 30.5, 1445473186989993.5321},
        {2.0, 0.5, 45.0, 1.9314605039521711116e22}, {1.5, 1.5, 100.0, 2.6881171418161354484e43},
        {2.5, 1.5, 250.0, 6.2815555703161488332e110}, {5.0, 0.5, 60.0, 1.1235148877240051387e33},
        {0.7, 3.2, 12.0, 658.15771642262522777},    {1.5, 0.5, -10.0, -0.00086259866548721217918},
        {2.0, 0.5, 31.0, 9316828113407794.3028},    {4.5, 0.5, 35.0, 5.237243748133779856e20},
        {1.0, 1.5, 500.0, 5.5628953517235135812e215},
    };
    for (const Case& c : cases) {
        CAPTURE(c.a);
        CAPTURE(c.b);
        CAPTURE(c.z);
        const auto r = kummer_1f1(c.a, c.b, c.z);
        CHECK(rel(r.real(), c.v) < 1e-12);
        CHECK(r.est_error <= 1e-10 * std::abs(c.v));
    }
}

TEST_CASE("kummer 1F1 method selection") {
    CHECK(kummer_1f1(1.5, 0.5, 10.0).method == HyperMethod::series);
    CHECK(kummer_1f1(1.5, 0.5, -10.0).method == HyperMethod::connection);
    CHECK(kummer_1f1(1.5, 1.5, 100.0).method == HyperMethod::asymptotic);
}

TEST_CASE("kummer 1F1 series and asymptotic agree in the overlap") {
    for (double z : {30.0, 35.0, 40.0, 50.0}) {
        for (double a : {1.0, 1.5, 2.5}) {
            const auto s = detail::kummer_series(a, 1.5, z);
            const auto as = detail::kummer_asymptotic(a, 1.5, z);
            CAPTURE(z);
            CAPTURE(a);
            CHECK(rel(as.real(), s.real()) < 1e-10);
        }
    }
}

TEST_CASE("kummer 1F1 against Boost for negative arguments") {
    for (double z : {-0.5, -3.0, -12.0, -40.0}) {
        for (double a : {0.5, 1.5, 2.0}) {
            for (double b : {0.5, 1.5}) {
                const double ref = boost::math::hypergeometric_1F1(a, b, z);
                CAPTURE(z);
                CHECK(std::abs(kummer_1f1(a, b, z).real() - ref) <= 1e-11 * std::max(1.0, std::abs(ref)));
            }
        }
    }
}

TEST_CASE("kummer 1F1 far on the negative axis") {
    const double pi = 3.14159265358979323846;
    for (double z : {-689.0, -800.0, -5000.0}) {
        CAPTURE(z);
        CHECK(rel(kummer_1f1(1.0, 2.0, z).real(), std::expm1(z) / z) < 1e-13);
        CHECK(rel(kummer_1f1(0.5, 1.5, z).real(), std::sqrt(pi) / (2.0 * std::sqrt(-z))) < 1e-13);
    }
}

TEST_CASE("kummer 1F1 closed forms") {
    CHECK(rel(kummer_1f1(1.5, 1.5, 7.0).real(), std::exp(7.0)) < 1e-13);
    CHECK(kummer_1f1(-2.0, 0.5, 3.0).real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(kummer_1f1(1.0, -1.0, 2.0), Error);
}

TEST_CASE("gauss 2F1 against mpmath") {
    struct Case {
        double a1, a2, b1, z, v;
    };
    const Case cases[] = {
        {-0.5, 1.0, 0.5, -1.0, 1.7853981633974483096},
        {-0.5, 1.0, 0.5, -1e4, 157.0796660108231381},
        {-1.5, 1.0, 1.5, -50.0, 216.66985864337704614},
        {0.3, 1.7, 2.2, -0.5, 0.90801959984544904441},
        {0.3, 1.7, 2.2, -1e4, 0.070577643681415767505},
        {2.5, 0.5, 1.5, -300.0, 0.038489858457990441109},
        {1.0, 2.0, 3.0, -1e4, 0.00019981579119266046968},
        {0.5, 1.5, 0.5, -20.0, 0.010391328106475827679},
        {-1.0, 1.0, 1.5, -30.0, 21.0},
        {-1.5, 1.0, 0.5, -9999.0, 2356076.6775424460704},
        {1.5, 2.5, 1.2, -7.5, -0.0049696925542600978117},
        {0.25, 0.75, 1.5, -5000.0, 0.16699430988264070579},
    };
    for (const Case& c : cases) {
        CAPTURE(c.a1);
        CAPTURE(c.a2);
        CAPTURE(c.b1);
        CAPTURE(c.z);
        CHECK(rel(gauss_2f1(c.a1, c.a2, c.b1, c.z).real(), c.v) < 1e-11);
    }
}

TEST_CASE("gauss 2F1 invalid arguments") {
    CHECK_THROWS_AS(gauss_2f1(0.5, 0.5, -2.0, -0.5), Error);
    CHECK_THROWS_AS(gauss_2f1(0.5, 0.5, 1.5, 1.5), Error);
}

TEST_CASE("gaussian moment integral against mpmath") {
    CHECK(rel(gaussian_moment_integral(2.5, 1.3), 2.8230013833419094878) < 1e-12);
    CHECK(rel(gaussian_moment_integral(3.0, 4.0), 1064.5099902893035146) < 1e-12);
    CHECK(rel(gaussian_moment_integral(0.5, -1.0), 0.32015709036014648798) < 1e-12);
    CHECK(rel(gaussian_moment_integral(1.0, 2.0), 4.9390930166280660041) < 1e-12);
    CHECK_THROWS_AS(gaussian_moment_integral(-1.0, 0.0), Error);
}

TEST_CASE("radial gaussian integral and sphere area") {
    const double pi = 3.14159265358979323846;
    CHECK(rel(radial_gaussian_integral(3.0, 2.0), std::sqrt(pi) / 2.0 / 2.0 / std::pow(2.0, 1.5)) < 1e-13);
    CHECK(rel(sphere_area(2), 2.0 * pi) < 1e-14);
    CHECK(rel(sphere_area(3), 4.0 * pi) < 1e-14);
    CHECK(rel(sphere_area(1), 2.0) < 1e-14);
}
