#include <doctest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <cmath>

#include "oukit/errors.hpp"
#include "oukit/semigroup.hpp"

using namespace oukit;

namespace {

MatrixXr planar(double s) {
    MatrixXr S(2, 2);
    S << 0.0, s, -s, 0.0;
    return S;
}

OUSystem pair_system(double s) {
    MatrixXc A(2, 2);
    A << cplx(1.0, 0.3), 0.5, 0.0, cplx(1.5, -0.2);
    const MatrixXc B = 0.2 * MatrixXc::Identity(2, 2) + 0.3 * A;
    return validate_system(A, B, planar(s));
}

GridFunction gaussian_grid(const GridSpec& g, int N, double width = 1.0) {
    return sample(g, N, [N, width](const VectorXr& x) {
        VectorXc v(N);
        for (int k = 0; k < N; ++k) v(k) = cplx(1.0 + k, 0.5 * k) * std::exp(-x.squaredNorm() / (width * width));
        return v;
    });
}

double max_abs_diff(const GridFunction& a, const GridFunction& b, const InteriorRange& r) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.spec.nodes(); ++k)
        if (r.contains(a.spec.multi_index(k))) m = std::max(m, (a.at(k) - b.at(k)).norm());
    return m;
}

}  // namespace

TEST_CASE("interpolation reproduces cubics") {
    const GridFunction v = sample(cube_grid(2, -1.0, 1.0, 9), 1, [](const VectorXr& x) {
        return VectorXc::Constant(1, x(0) * x(0) * x(0) - 2.0 * x(0) * x(1) + x(1) * x(1));
    });
    VectorXr x(2);
    x << 0.37, -0.81;
    const cplx exact = x(0) * x(0) * x(0) - 2.0 * x(0) * x(1) + x(1) * x(1);
    CHECK(std::abs(interpolate(v, x)(0) - exact) < 1e-13);
    x << 1.5, 0.0;
    CHECK(interpolate(v, x).norm() == 0.0);
}

TEST_CASE("T(0) is the identity") {
    const OUSystem sys = pair_system(1.0);
    const GridFunction v = gaussian_grid(cube_grid(2, -3.0, 3.0, 13), 2);
    const GridFunction out = apply_semigroup(sys, v, 0.0);
    CHECK(out.values == v.values);
    CHECK(semigroup_composition_residual(sys, v, 0.0, 0.3) == 0.0);
}

TEST_CASE("constant input") {
    const OUSystem sys = pair_system(0.7);
    VectorXc c(2);
    c << 1.0, cplx(-0.5, 2.0);
    const double t = 0.8;
    VectorXr x(2);
    x << 0.4, -1.1;
    const VectorXc ref = matrix_function(sys, [t](cplx z) { return std::exp(-z * t); }, Which::B) * c;
    CHECK((semigroup_at(sys, constant_field(c, 2), t, x) - ref).norm() < 1e-12 * ref.norm());
    // Grid padded wide relative to the kernel width.
    const GridFunction v = sample(cube_grid(2, -8.0, 8.0, 81), 2, [&](const VectorXr&) { return c; });
    const GridFunction out = apply_semigroup(sys, v, 0.2);
    const VectorXc ref2 = matrix_function(sys, [](cplx z) { return std::exp(-z * 0.2); }, Which::B) * c;
    const std::size_t mid = v.spec.flat_index({40, 40});
    CHECK((out.at(mid) - ref2).norm() < 1e-10 * ref2.norm());
}

TEST_CASE("quadratic input") {
    const OUSystem heat = make_scalar_system(1.0, 0.0, MatrixXr::Zero(2, 2));
    Field f;
    f.N = 1;
    f.f = [](const VectorXr& x) { return VectorXc::Constant(1, x(0) * x(0)); };
    f.scale = 1.0;
    VectorXr x(2);
    x << 0.7, -0.2;
    const double t = 0.35;
    CHECK(std::abs(semigroup_at(heat, f, t, x)(0) - (0.49 + 2.0 * t)) < 1e-11);
}

TEST_CASE("grid engine against field engine") {
    const OUSystem sys = pair_system(1.2);
    const GridSpec g = cube_grid(2, -6.0, 6.0, 61);
    const GridFunction v = gaussian_grid(g, 2);
    VectorXc c(2);
    c << 1.0, cplx(2.0, 0.5);
    const Field f = gaussian_field(c, VectorXr::Zero(2), 1.0);
    const double t = 0.4;
    std::vector<VectorXr> pts{VectorXr::Zero(2), g.node(g.flat_index({35, 22})), g.node(g.flat_index({27, 33}))};
    const GridPropagator gp(sys, v);
    const FieldPropagator fp(sys, f);
    const PointValues a = gp.semigroup(t, pts, 2);
    const PointValues b = fp.semigroup(t, pts, 2);
    for (std::size_t k = 0; k < pts.size(); ++k) {
        CHECK((a.value[k] - b.value[k]).norm() < 1e-4 * b.value[0].norm());
        for (int i = 0; i < 2; ++i) {
            CHECK((a.grad[k][static_cast<std::size_t>(i)] - b.grad[k][static_cast<std::size_t>(i)]).norm() < 1e-4 * b.value[0].norm());
            for (int j = 0; j < 2; ++j)
                CHECK((a.hess[k][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -
                       b.hess[k][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]).norm() < 1e-3 * b.value[0].norm());
        }
    }
    // Field-engine derivatives against central differences of the field engine.
    const double h = 1e-3;
    for (int i = 0; i < 2; ++i) {
        VectorXr e = VectorXr::Zero(2);
        e(i) = h;
        const PointValues pm = fp.semigroup(t, {pts[1] + e, pts[1] - e}, 0);
        const VectorXc fd = (pm.value[0] - pm.value[1]) / (2.0 * h);
        CHECK((fd - b.grad[1][static_cast<std::size_t>(i)]).norm() < 1e-6 * b.value[0].norm());
    }
}

TEST_CASE("composition and factorization") {
    const OUSystem heat = make_scalar_system(1.0, 0.0, MatrixXr::Zero(2, 2));
    const GridFunction v1 = gaussian_grid(cube_grid(2, -6.0, 6.0, 121), 1);
    CHECK(semigroup_composition_residual(heat, v1, 0.25, 0.25) <= 1e-5);
    const OUSystem sys = pair_system(1.0);
    const GridFunction v2 = gaussian_grid(cube_grid(2, -7.0, 7.0, 71), 2);
    CHECK(semigroup_composition_residual(sys, v2, 0.2, 0.3) <= 1e-4);
    CHECK(factorization_residual(sys, v2, 0.5) <= 1e-8);
    const GridFunction d = apply_diffusion(heat, v1, 0.3);
    const GridFunction s = apply_semigroup(heat, v1, 0.3);
    CHECK(max_abs_diff(d, s, interior_range(v1.spec, 0.0)) == 0.0);
}

TEST_CASE("generator by finite differences") {
    const OUSystem heat = make_scalar_system(1.0, 0.0, MatrixXr::Zero(2, 2));
    VectorXr x(2);
    x << 0.3, -0.4;
    auto sq = [](const VectorXr& y) { return VectorXc::Constant(1, y(0) * y(0)); };
    CHECK(std::abs(apply_generator_fd(heat, sq, x, 1e-3)(0) - 2.0) < 1e-6);
    const double sig = 0.8, delta = 0.6;
    const OUSystem rot = make_scalar_system(1.0, delta, planar(sig));
    auto prod = [](const VectorXr& y) { return VectorXc::Constant(1, y(0) * y(1)); };
    const cplx expected = sig * (x(1) * x(1) - x(0) * x(0)) - delta * x(0) * x(1);
    CHECK(std::abs(apply_generator_fd(rot, prod, x, 1e-3)(0) - expected) < 1e-8);

    auto smooth = [](const VectorXr& y) { return VectorXc::Constant(1, std::sin(y(0)) * std::exp(-0.3 * y(1) * y(1))); };
    const OUSystem sys = pair_system(0.5);
    auto vec = [&](const VectorXr& y) {
        VectorXc r(2);
        r << smooth(y)(0), cplx(0.0, 1.0) * smooth(y)(0) * y(1);
        return r;
    };
    const VectorXc l1 = apply_generator_fd(sys, vec, x, 0.02);
    const VectorXc l2 = apply_generator_fd(sys, vec, x, 0.01);
    const VectorXc l3 = apply_generator_fd(sys, vec, x, 0.005);
    const double ratio = (l1 - l2).norm() / (l2 - l3).norm();
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.05));

    const GridFunction g = sample(cube_grid(2, -1.0, 1.0, 21), 1, sq);
    VectorXr edge(2);
    edge << 0.95, 0.0;
    CHECK_THROWS_AS(apply_generator_fd(heat, g, edge, 0.05), Error);
    CHECK(std::abs(apply_generator_fd(heat, g, x, 0.1)(0) - 2.0) < 1e-9);
}

TEST_CASE("omega bound") {
    const OUSystem sys = pair_system(1.0);
    const SpectralQuantities sq0 = spectral_quantities(sys, 0.0, 2.0);
    const OmegaBound ob0 = omega_bound(sq0, OmegaMode::lp_weighted, 2.0, 1.0, 0.1);
    CHECK(ob0.omega == doctest::Approx(-sq0.b0));
    MatrixXc A = VectorXc(Eigen::Vector2cd(1.0, 2.0)).asDiagonal();
    MatrixXc B = VectorXc(Eigen::Vector2cd(3.0, 5.0)).asDiagonal();
    const SpectralQuantities sd = spectral_quantities(validate_system(A, B, planar(1.0)), 0.0, 1.0);
    const OmegaBound cb = omega_bound(sd, OmegaMode::cb_unweighted);
    CHECK(cb.M == doctest::Approx(4.0));
    CHECK(cb.omega == doctest::Approx(-3.0));
    const SpectralQuantities sq = spectral_quantities(sys, 0.3, 2.0);
    const OmegaBound ob = omega_bound(sq, OmegaMode::lp_weighted, 2.0, 1.0, 0.1);
    CHECK(ob.omega == doctest::Approx(-sq.b0 + 1.1 * sq.nu / 2.0));
    BoundExtras ex;
    ex.p = 2.0;
    for (double t : {0.01, 0.5, 3.0, 20.0, 100.0})
        CHECK(bound_C(4, sq, t, ex) <= ob.M * std::exp(ob.omega * t));
}

TEST_CASE("resolvent of constants") {
    const double b = 0.7;
    const OUSystem sys = make_scalar_system(1.0, b, planar(0.9));
    VectorXc c = VectorXc::Constant(1, cplx(2.0, -1.0));
    VectorXr x(2);
    x << 0.5, 0.3;
    for (cplx lambda : {cplx(0.5, 0.0), cplx(1.0, 2.0), cplx(-0.2, -1.0)}) {
        const VectorXc v = resolvent_at(sys, lambda, constant_field(c, 2), {x})[0];
        CHECK(std::abs(v(0) - c(0) / (lambda + b)) < 1e-8 * std::abs(c(0) / (lambda + b)));
    }
    CHECK_THROWS_AS(resolvent_time_rule(sys, cplx(-b, 0.0), 0.0, 1.0, 1.0), Error);
}

TEST_CASE("strong continuity") {
    const OUSystem sys = make_scalar_system(cplx(1.0, 0.2), 0.1, planar(0.5));
    const GridFunction v = gaussian_grid(cube_grid(2, -6.0, 6.0, 61), 1);
    NormSpec n;
    n.p = 2.0;
    const std::vector<double> r = strong_continuity_probe(sys, v, n, {0.2, 0.1, 0.05, 0.01});
    for (std::size_t k = 1; k < r.size(); ++k) CHECK(r[k] < r[k - 1]);
    CHECK(r.back() < 0.05 * grid_norm(v, n));
    const GridFunction zero = sample(v.spec, 1, [](const VectorXr&) { return VectorXc::Zero(1); });
    for (double e : strong_continuity_probe(sys, zero, n, {0.1, 0.01})) CHECK(e == 0.0);
}

TEST_CASE("greens function probe") {
    const OUSystem sys = make_scalar_system(1.0, 0.8, planar(0.6));
    VectorXr x(2), xi(2);
    x << 0.5, 0.1;
    xi << -0.2, 0.4;
    const GreensProbe g = greens_function_probe(sys, x, xi, 40.0);
    const OUSystem still = make_scalar_system(1.0, 0.8, MatrixXr::Zero(2, 2));
    const double r = (x - xi).norm();
    const double ref = -boost::math::cyl_bessel_k(0, std::sqrt(0.8) * r) / (2.0 * 3.14159265358979323846);
    CHECK(std::abs(greens_function_probe(still, x, xi, 60.0).value(0, 0) - ref) < 1e-8 * std::abs(ref));
    const MatrixXr R = rotation(sys.S, 0.9);
    const GreensProbe gr = greens_function_probe(sys, R * x, R * xi, 40.0);
    CHECK(std::abs(g.value(0, 0) - gr.value(0, 0)) < 1e-8 * std::abs(g.value(0, 0)));
    const OUSystem nd = make_scalar_system(1.0, 0.0, planar(0.6));
    CHECK_THROWS_AS(greens_function_probe(nd, x, xi, 10.0), Error);
}
