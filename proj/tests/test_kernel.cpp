#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oukit/errors.hpp"
#include "oukit/kernel.hpp"
#include "oukit/special.hpp"

using namespace oukit;

namespace {

const double kPi = std::numbers::pi;

MatrixXr planar(double s) {
    MatrixXr S(2, 2);
    S << 0.0, s, -s, 0.0;
    return S;
}

OUSystem nondiagonal_system(double s) {
    MatrixXc A(2, 2), B;
    A << cplx(1.0, 0.3), 0.5, 0.0, cplx(1.5, -0.2);
    B = 0.2 * MatrixXc::Identity(2, 2) + 0.3 * A;
    return validate_system(A, B, planar(s));
}

}  // namespace

TEST_CASE("scalar heat kernel") {
    const OUSystem sys = make_scalar_system(1.0, 0.0, planar(0.0));
    VectorXr x(2), xi(2);
    x << 0.3, -0.2;
    xi << 0.3, -0.2;
    CHECK(std::abs(heat_kernel(sys, x, xi, 0.7)(0, 0) - 1.0 / (4.0 * kPi * 0.7)) < 1e-15);
    xi << 1.0, 0.5;
    const double r2 = (x - xi).squaredNorm();
    CHECK(std::abs(heat_kernel(sys, x, xi, 0.7)(0, 0) - std::exp(-r2 / 2.8) / (4.0 * kPi * 0.7)) < 1e-15);
    CHECK_THROWS_AS(heat_kernel(sys, x, xi, 0.0), Error);
}

TEST_CASE("kernel through the diagonalization") {
    const OUSystem sys = nondiagonal_system(0.8);
    VectorXr x(2), xi(2);
    x << 0.4, -0.1;
    xi << -0.3, 0.6;
    const double t = 0.6;
    const MatrixXr R = rotation(sys.S, t);
    const double r2 = (R * x - xi).squaredNorm();
    VectorXc k(2);
    for (int m = 0; m < 2; ++m) {
        const cplx la = sys.lambdaA(m), lb = sys.lambdaB(m);
        k(m) = std::exp(-lb * t - r2 / (4.0 * t * la)) / (4.0 * kPi * t * la);
    }
    const MatrixXc ref = sys.Y * k.asDiagonal() * sys.Y.inverse();
    CHECK((heat_kernel(sys, x, xi, t) - ref).norm() < 1e-14);
    VectorXr psi(2);
    psi << 0.0, 0.0;
    const MatrixXc K0 = kernel_K(sys, psi, t);
    const MatrixXc ref0 = matrix_function(sys, [t](cplx z) { return 1.0 / (4.0 * kPi * t * z); }, Which::A) *
                          matrix_function(sys, [t](cplx z) { return std::exp(-z * t); }, Which::B);
    CHECK((K0 - ref0).norm() < 1e-14);
}

TEST_CASE("gauge and rotation invariance") {
    const OUSystem sys = nondiagonal_system(1.3);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int k = 0; k < 20; ++k) {
        VectorXr x(2), psi(2);
        x << u(rng), u(rng);
        psi << u(rng), u(rng);
        const double t = 0.2 + 0.5 * std::abs(u(rng));
        const VectorXr xi = rotation(sys.S, t) * x - psi;
        CHECK((kernel_K(sys, psi, t) - heat_kernel(sys, x, xi, t)).norm() < 1e-14);
        const double tau = u(rng);
        const VectorXr rpsi = rotation(sys.S, tau) * psi;
        CHECK((kernel_K(sys, rpsi, t) - kernel_K(sys, psi, t)).norm() < 1e-12);
    }
}

TEST_CASE("derivative kernels match finite differences") {
    const OUSystem sys = nondiagonal_system(0.9);
    const double t = 0.5;
    const double h = 1e-4;
    VectorXr x(2), xi(2);
    x << 0.3, 0.2;
    xi << -0.2, 0.4;
    const MatrixXr R = rotation(sys.S, t);
    const VectorXr psi = R * x - xi;
    for (int i = 0; i < 2; ++i) {
        VectorXr e = VectorXr::Zero(2);
        e(i) = h;
        const MatrixXc fd = (heat_kernel(sys, x + e, xi, t) - heat_kernel(sys, x - e, xi, t)) / (2.0 * h);
        const MatrixXc Ki = kernel_Ki(sys, psi, t, i);
        CHECK((fd - Ki).norm() < 1e-6 * Ki.norm() + 1e-9);
        for (int j = 0; j < 2; ++j) {
            VectorXr f = VectorXr::Zero(2);
            f(j) = h;
            const MatrixXc fd2 = (heat_kernel(sys, x + e + f, xi, t) - heat_kernel(sys, x + e - f, xi, t) -
                                  heat_kernel(sys, x - e + f, xi, t) + heat_kernel(sys, x - e - f, xi, t)) /
                                 (4.0 * h * h);
            const MatrixXc Kji = kernel_Kji(sys, psi, t, i, j);
            CHECK((fd2 - Kji).norm() < 1e-5 * std::max(1.0, Kji.norm()));
        }
    }
    VectorXr perp = R.col(0);
    perp = VectorXr(Eigen::Vector2d(-perp(1), perp(0)));
    CHECK(kernel_Ki(sys, perp, t, 0).norm() < 1e-15);
}

TEST_CASE("riccati") {
    const OUSystem heat = make_scalar_system(1.0, 0.0, MatrixXr::Zero(2, 2));
    const RiccatiSolution s = riccati_solution(heat, 1.0);
    MatrixXc ref(4, 4);
    ref << 1, 0, -1, 0, 0, 1, 0, -1, -1, 0, 1, 0, 0, -1, 0, 1;
    CHECK((s.N - 0.5 * ref).norm() < 1e-15);
    CHECK(std::abs(s.phi - 1.0 / (4.0 * kPi)) < 1e-15);
    const RiccatiResidual r = riccati_residual(heat, 1.0);
    CHECK(r.res_N <= 1e-8);
    CHECK(r.res_phi <= 1e-8);
    const OUSystem cs = make_scalar_system(cplx(1.0, 0.5), 2.0, planar(1.0));
    const RiccatiResidual r2 = riccati_residual(cs, 0.7);
    CHECK(r2.res_N <= 1e-7);
    CHECK(r2.res_phi <= 1e-7);
    CHECK_THROWS_AS(riccati_solution(nondiagonal_system(1.0), 1.0), Error);
}

TEST_CASE("kernel moments") {
    const OUSystem heat = make_scalar_system(1.0, 0.0, MatrixXr::Zero(2, 2));
    CHECK(std::abs(kernel_moments(heat, 0.5, 2, 0, 0).value(0, 0) - 1.0) < 1e-8);
    const OUSystem sys = nondiagonal_system(0.7);
    for (double t : {0.1, 1.0, 5.0}) {
        const KernelMoments km = kernel_moments_all(sys, t);
        const MatrixXc eB = matrix_function(sys, [t](cplx z) { return std::exp(-z * t); }, Which::B);
        CHECK(spectral_norm(km.m0 - eB) < 1e-8);
        for (int i = 0; i < 2; ++i) {
            CHECK(spectral_norm(km.m1[static_cast<std::size_t>(i)]) < 1e-8);
            for (int j = 0; j < 2; ++j) {
                const MatrixXc ref = i == j ? MatrixXc(2.0 * t * eB * sys.A) : MatrixXc::Zero(2, 2);
                CHECK(spectral_norm(km.m2[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] - ref) < 1e-8);
            }
        }
    }
}

TEST_CASE("bound constants") {
    SpectralQuantities sq;
    sq.d = 2;
    sq.kappa = 1.0;
    sq.a1 = 4.0;
    sq.b0 = 3.0;
    sq.a_min = 1.0;
    sq.a_max = 2.0;
    sq.a0 = 1.0;
    sq.nu = 0.0;
    CHECK(bound_C(1, sq, 0.7) == doctest::Approx(4.0 * std::exp(-2.1)).epsilon(1e-13));
    sq.nu = 0.5;
    BoundExtras one;
    CHECK(bound_C(4, sq, 1.0, one) == doctest::Approx(bound_C(1, sq, 1.0)).epsilon(1e-14));
    CHECK(bound_C(5, sq, 1.0, one) == doctest::Approx(bound_C(2, sq, 1.0)).epsilon(1e-14));
    BoundExtras inf;
    inf.p = std::numeric_limits<double>::infinity();
    CHECK(bound_C(6, sq, 1.0, inf) == doctest::Approx(bound_C(3, sq, 1.0)).epsilon(1e-14));

    // Bracket of C1 through the moment integral: int_0^inf s^{d-1} exp(-s^2 + 2 sqrt(z) s) ds.
    const double z = sq.nu * 1.0;
    const double via_moment = 2.0 / std::tgamma(1.0) * gaussian_moment_integral(1.0, 2.0 * std::sqrt(z));
    CHECK(bound_C(1, sq, 1.0) == doctest::Approx(4.0 * std::exp(-3.0) * via_moment).epsilon(1e-12));

    const C78 c0 = bound_C78(sq, 1.0, 1.0, 1e-12);
    CHECK(c0.C7 == doctest::Approx(4.0).epsilon(1e-5));
    CHECK(bound_C78(sq, 1.0, 1.0, 0.3).C7 <= bound_C78(sq, 1.0, 1.0, 0.6).C7);
    CHECK_THROWS_AS(bound_C78(sq, 1.0, 1.0, 1.0), Error);
}

TEST_CASE("weighted kernel integrals") {
    const OUSystem heat = make_scalar_system(1.0, 0.0, MatrixXr::Zero(2, 2));
    CHECK(weighted_kernel_l1(heat, 0, 0.0, 0.8).value == doctest::Approx(1.0).epsilon(1e-10));
    MatrixXc A = VectorXc(Eigen::Vector2cd(1.0, 2.0)).asDiagonal();
    MatrixXc B = VectorXc(Eigen::Vector2cd(3.0, 5.0)).asDiagonal();
    const OUSystem diag = validate_system(A, B, planar(1.0));
    // The integral of the pointwise spectral norm exceeds e^{-3}; the wider second component dominates for large |psi|.
    const double v = weighted_kernel_l1(diag, 0, 0.0, 1.0).value;
    CHECK(v >= std::exp(-3.0));
    CHECK(v == doctest::Approx(0.0500150388592525720313).epsilon(1e-9));
    const OUSystem sys = nondiagonal_system(0.5);
    const SpectralQuantities sq = spectral_quantities(sys, 0.4, 1.0);
    for (double t : {0.1, 1.0, 5.0}) {
        for (int level = 0; level <= 2; ++level) {
            const double v = weighted_kernel_l1(sys, level, 0.4, t, 0, level == 2 ? 0 : 1).value;
            CAPTURE(t);
            CAPTURE(level);
            CHECK(v <= bound_C(level + 1, sq, t));
        }
    }
}

TEST_CASE("chapman kolmogorov") {
    const OUSystem heat = make_scalar_system(1.0, 0.0, MatrixXr::Zero(2, 2));
    VectorXr x(2), xi(2);
    x << 0.2, -0.4;
    xi << 0.5, 0.1;
    CHECK(chapman_kolmogorov_residual(heat, x, xi, 0.5, 0.5).residual <= 1e-7);
    CHECK(chapman_kolmogorov_residual(heat, VectorXr::Zero(2), VectorXr::Zero(2), 0.5, 0.5).residual <= 1e-8);
    const OUSystem sys = nondiagonal_system(1.1);
    CHECK(chapman_kolmogorov_residual(sys, x, xi, 0.3, 0.7).residual <= 1e-6);
}

TEST_CASE("dirac limit") {
    const OUSystem heat = make_scalar_system(1.0, 0.0, MatrixXr::Zero(2, 2));
    VectorXr x(2);
    x << 0.3, 0.1;
    auto bump = [](const VectorXr& y) { return VectorXc::Constant(1, std::exp(-y.squaredNorm())); };
    const DiracProbe p = dirac_limit_probe(heat, bump, x, {0.1, 0.05, 0.01});
    CHECK(p.errors[1] < p.errors[0]);
    CHECK(p.errors[2] < p.errors[1]);
    auto one = [](const VectorXr&) { return VectorXc::Constant(1, 1.0); };
    const DiracProbe c = dirac_limit_probe(heat, one, x, {0.1});
    CHECK(c.errors[0] < 1e-12);
}
