#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "oukit/errors.hpp"
#include "oukit/linalg.hpp"

using namespace oukit;

namespace {

MatrixXr planar(double s) {
    MatrixXr S(2, 2);
    S << 0.0, s, -s, 0.0;
    return S;
}

MatrixXc cdiag(std::initializer_list<cplx> v) {
    VectorXc d(static_cast<Eigen::Index>(v.size()));
    Eigen::Index k = 0;
    for (cplx c : v) d(k++) = c;
    return d.asDiagonal();
}

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::ConfigInvalid;
}

}  // namespace

TEST_CASE("diagonal system") {
    const OUSystem sys = validate_system(cdiag({1.0, 2.0}), cdiag({3.0, 5.0}), planar(1.0));
    CHECK((sys.Y - MatrixXc::Identity(2, 2)).norm() < 1e-14);
    CHECK(sys.d == 2);
    CHECK(sys.N == 2);
    const SpectralQuantities sq = spectral_quantities(sys, 0.0, 1.0);
    CHECK(sq.a_min == doctest::Approx(1.0));
    CHECK(sq.a_max == doctest::Approx(2.0));
    CHECK(sq.a0 == doctest::Approx(1.0));
    CHECK(sq.b0 == doctest::Approx(3.0));
    CHECK(sq.kappa == doctest::Approx(1.0));
    CHECK(sq.a1 == doctest::Approx(4.0));
    CHECK(sq.nu == 0.0);
}

TEST_CASE("shared eigenvectors") {
    MatrixXc A(2, 2), B(2, 2);
    A << 1.0, 1.0, 0.0, 2.0;
    B << 3.0, 2.0, 0.0, 5.0;
    const OUSystem sys = validate_system(A, B, planar(0.5));
    MatrixXc Y(2, 2);
    Y << 1.0, 1.0, 0.0, 1.0;
    CHECK((sys.Y - Y).norm() < 1e-12);
    CHECK((sys.Y * sys.lambdaA.asDiagonal() * sys.Yinv - A).norm() <= 1e-10 * A.norm());
    CHECK((sys.Y * sys.lambdaB.asDiagonal() * sys.Yinv - B).norm() <= 1e-10 * B.norm());
    const SpectralQuantities sq = spectral_quantities(sys, 0.0, 1.0);
    Eigen::JacobiSVD<MatrixXc> s1(Y), s2(Y.inverse());
    CHECK(sq.kappa == doctest::Approx(s1.singularValues()(0) * s2.singularValues()(0)).epsilon(1e-12));

    const double pi = std::numbers::pi;
    const MatrixXc F = matrix_function(sys, [pi](cplx z) { return 1.0 / (4.0 * pi * z); }, Which::A);
    const MatrixXc ref = Y * cdiag({1.0 / (4.0 * pi), 1.0 / (8.0 * pi)}) * Y.inverse();
    CHECK((F - ref).norm() < 1e-14);
}

TEST_CASE("validation errors") {
    CHECK(code_of([] { validate_system(cdiag({1.0, -1.0}), cdiag({0.0, 0.0}), planar(1.0)); }) ==
          ErrorCode::NonEllipticA);
    MatrixXr S(2, 2);
    S << 0.0, 1.0, 1.0, 0.0;
    CHECK(code_of([&] { validate_system(cdiag({1.0, 2.0}), cdiag({0.0, 0.0}), S); }) == ErrorCode::NotSkew);
    MatrixXc J(2, 2);
    J << 1.0, 1.0, 0.0, 1.0;
    CHECK(code_of([&] { validate_system(J, cdiag({0.0, 0.0}), planar(1.0)); }) == ErrorCode::NotDiagonalizable);
    MatrixXc B(2, 2);
    B << 1.0, 0.0, 1.0, 2.0;
    CHECK(code_of([&] { validate_system(cdiag({1.0, 2.0}), B, planar(1.0)); }) == ErrorCode::NotSimultaneous);
    CHECK(code_of([] { validate_system(cdiag({1.0, 2.0}), cdiag({1.0}), planar(1.0)); }) == ErrorCode::InvalidInput);
}

TEST_CASE("scalar spectral quantities") {
    const OUSystem sys = make_scalar_system(cplx(2.0, 1.0), 0.0, planar(0.0));
    const SpectralQuantities sq = spectral_quantities(sys, 0.5, 2.0);
    CHECK(sq.a_min == doctest::Approx(std::sqrt(5.0)));
    CHECK(sq.a_max == doctest::Approx(std::sqrt(5.0)));
    CHECK(sq.a0 == doctest::Approx(2.0));
    CHECK(sq.b0 == doctest::Approx(0.0));
    CHECK(sq.nu == doctest::Approx(5.0 * 0.25 * 4.0 / 2.0));
}

TEST_CASE("matrix functions") {
    const OUSystem sys = validate_system(cdiag({1.0, 2.0}), cdiag({0.0, 0.0}), planar(1.0));
    const MatrixXc E = matrix_function(sys, [](cplx z) { return std::exp(z); }, Which::A);
    CHECK(std::abs(E(0, 0) - std::exp(1.0)) < 1e-14);
    CHECK(std::abs(E(1, 1) - std::exp(2.0)) < 1e-13);
    const MatrixXc I = matrix_function(sys, [](cplx z) { return 1.0 / z; }, Which::A);
    CHECK(std::abs(I(1, 1) - 0.5) < 1e-15);
}

TEST_CASE("principal power") {
    CHECK_THROWS_AS(principal_power(cplx(-2.0, 0.0), -1.5), Error);
    CHECK(std::abs(principal_power(cplx(-2.0, 0.0), 2.0) - 4.0) < 1e-14);
    MatrixXc A(2, 2);
    A << cplx(1.0, 0.5), 1.0, 0.0, cplx(2.0, -1.0);
    const OUSystem sys = validate_system(A, MatrixXc::Zero(2, 2), planar(1.0));
    for (int d : {2, 3}) {
        const MatrixXc h = matrix_power(sys, -0.5 * d, Which::A);
        const MatrixXc f = matrix_power(sys, -1.0 * d, Which::A);
        CHECK((h * h - f).norm() < 1e-13 * f.norm());
    }
}

TEST_CASE("rotation") {
    const double pi = std::numbers::pi;
    const MatrixXr R = rotation(planar(1.0), pi / 2.0);
    MatrixXr ref(2, 2);
    ref << 0.0, 1.0, -1.0, 0.0;
    CHECK((R - ref).norm() < 1e-14);
    CHECK((rotation(planar(1.0), 0.0) - MatrixXr::Identity(2, 2)).norm() == 0.0);

    MatrixXr S3(3, 3);
    S3 << 0.0, 0.7, -0.2, -0.7, 0.0, 1.3, 0.2, -1.3, 0.0;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int k = 0; k < 50; ++k) {
        const double t = u(rng);
        const MatrixXr Q = rotation(S3, t);
        CHECK((Q.transpose() * Q - MatrixXr::Identity(3, 3)).norm() < 1e-12);
        VectorXr x = VectorXr::NullaryExpr(3, [&] { return u(rng); });
        CHECK(std::abs((Q * x).norm() - x.norm()) < 1e-12 * x.norm());
        const MatrixXr ref3 = (S3 * t).exp();
        CHECK((Q - ref3).norm() < 1e-11);
    }
}
