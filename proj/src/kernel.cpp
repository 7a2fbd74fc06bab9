#include "oukit/kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "oukit/errors.hpp"
#include "oukit/quadrature.hpp"
#include "oukit/special.hpp"

namespace oukit {

namespace {

constexpr double kPi = std::numbers::pi;

void require_positive_time(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) raise(ErrorCode::InvalidInput, "kernel evaluation requires t > 0");
}

void require_index(const OUSystem& sys, int i) {
    if (i < 0 || i >= sys.d) raise(ErrorCode::InvalidInput, "spatial index out of range");
}

// int_R^inf r^k exp(-r^2/sigma^2 + b r) dr, for a tail that starts past the envelope peak.
double envelope_tail(double k, double sigma, double b, double R) {
    auto f = [&](double r) { return std::pow(r, k) * std::exp(-r * r / (sigma * sigma) + b * r); };
    const double end = R + 40.0 * sigma + 2.0 * b * sigma * sigma;
    auto res = integrate_adaptive(f, R, end, 0.0, 1e-6, 200);
    return res.value;
}

// Per-axis rule for the box [lo, hi] with panels no wider than width.
Rule1D box_rule(double lo, double hi, double width, int order, int refine) {
    int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / width)));
    panels <<= refine;
    return composite_gauss_legendre(lo, hi, panels, order);
}

template <class F>
void for_each_tensor_node(const std::vector<const Rule1D*>& axes, F&& f) {
    const std::size_t d = axes.size();
    std::vector<std::size_t> idx(d, 0);
    for (const Rule1D* a : axes)
        if (a->size() == 0) return;
    while (true) {
        f(idx);
        std::size_t k = 0;
        while (k < d) {
            if (++idx[k] < axes[k]->size()) break;
            idx[k] = 0;
            ++k;
        }
        if (k == d) break;
    }
}

// Y diag(v) Y^-1 written into out without temporaries.
void assemble_into(const OUSystem& sys, const cplx* v, MatrixXc& out) {
    const int n = sys.N;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            cplx s = 0.0;
            for (int m = 0; m < n; ++m) s += sys.Y(a, m) * v[m] * sys.Yinv(m, b);
            out(a, b) = s;
        }
}

}  // namespace

KernelEvaluator::KernelEvaluator(const OUSystem& sys, double t) : sys_(&sys), t_(t) {
    require_positive_time(t);
    R_ = RotationGenerator(sys.S).at(t);
    const int n = sys.N;
    pref_.resize(n);
    inv4_.resize(n);
    inv2_.resize(n);
    double min_decay = std::numeric_limits<double>::infinity();
    for (int m = 0; m < n; ++m) {
        const cplx la = sys.lambdaA(m);
        const cplx lb = sys.lambdaB(m);
        pref_(m) = principal_power(4.0 * kPi * t * la, -0.5 * sys.d) * std::exp(-lb * t);
        inv4_(m) = 1.0 / (4.0 * t * la);
        inv2_(m) = 1.0 / (2.0 * t * la);
        min_decay = std::min(min_decay, inv4_(m).real());
    }
    sigma_ = 1.0 / std::sqrt(min_decay);
}

VectorXc KernelEvaluator::diagonal(double r2) const {
    VectorXc v(pref_.size());
    for (Eigen::Index m = 0; m < v.size(); ++m) v(m) = pref_(m) * std::exp(-r2 * inv4_(m));
    return v;
}

MatrixXc KernelEvaluator::assemble(const VectorXc& v) const {
    if (sys_->N == 1) return MatrixXc::Constant(1, 1, v(0));
    return sys_->Y * v.asDiagonal() * sys_->Yinv;
}

MatrixXc KernelEvaluator::K(const VectorXr& psi) const { return assemble(diagonal(psi.squaredNorm())); }

MatrixXc KernelEvaluator::Ki(const VectorXr& psi, int i) const {
    require_index(*sys_, i);
    const double pi_ = psi.dot(R_.col(i));
    VectorXc v = diagonal(psi.squaredNorm());
    for (Eigen::Index m = 0; m < v.size(); ++m) v(m) *= -inv2_(m) * pi_;
    return assemble(v);
}

MatrixXc KernelEvaluator::Kji(const VectorXr& psi, int i, int j) const {
    require_index(*sys_, i);
    require_index(*sys_, j);
    const double pi_ = psi.dot(R_.col(i));
    const double pj = psi.dot(R_.col(j));
    VectorXc v = diagonal(psi.squaredNorm());
    for (Eigen::Index m = 0; m < v.size(); ++m) {
        v(m) *= inv2_(m) * inv2_(m) * pi_ * pj - (i == j ? inv2_(m) : cplx(0.0));
    }
    return assemble(v);
}

MatrixXc KernelEvaluator::H(const VectorXr& x, const VectorXr& xi) const { return K(R_ * x - xi); }

MatrixXc heat_kernel(const OUSystem& sys, const VectorXr& x, const VectorXr& xi, double t) {
    return KernelEvaluator(sys, t).H(x, xi);
}

MatrixXc kernel_K(const OUSystem& sys, const VectorXr& psi, double t) { return KernelEvaluator(sys, t).K(psi); }

MatrixXc kernel_Ki(const OUSystem& sys, const VectorXr& psi, double t, int i) {
    return KernelEvaluator(sys, t).Ki(psi, i);
}

MatrixXc kernel_Kji(const OUSystem& sys, const VectorXr& psi, double t, int i, int j) {
    return KernelEvaluator(sys, t).Kji(psi, i, j);
}

RiccatiSolution riccati_solution(const OUSystem& sys, double t) {
    if (sys.N != 1) raise(ErrorCode::SystemNotScalar, "the Riccati construction is stated for N = 1");
    require_positive_time(t);
    const int d = sys.d;
    const cplx alpha = sys.lambdaA(0);
    const cplx delta = sys.lambdaB(0);
    const MatrixXr E = RotationGenerator(sys.S).at(t);
    MatrixXc M = MatrixXc::Zero(2 * d, 2 * d);
    M.topLeftCorner(d, d).setIdentity();
    M.bottomRightCorner(d, d).setIdentity();
    M.topRightCorner(d, d) = -E.transpose().cast<cplx>();
    M.bottomLeftCorner(d, d) = -E.cast<cplx>();
    RiccatiSolution s;
    s.N = M / (2.0 * std::conj(alpha) * t);
    s.phi = principal_power(4.0 * kPi * alpha, -0.5 * d) * std::pow(t, -0.5 * d) * std::exp(-delta * t);
    return s;
}

RiccatiResidual riccati_residual(const OUSystem& sys, double t, double rel_step) {
    if (sys.N != 1) raise(ErrorCode::SystemNotScalar, "the Riccati construction is stated for N = 1");
    require_positive_time(t);
    const double h = rel_step * t;
    const int d = sys.d;
    const cplx alpha = sys.lambdaA(0);
    const cplx delta = sys.lambdaB(0);
    const RiccatiSolution s0 = riccati_solution(sys, t);
    const RiccatiSolution sp = riccati_solution(sys, t + h);
    const RiccatiSolution sm = riccati_solution(sys, t - h);
    const MatrixXc Nt = (sp.N - sm.N) / (2.0 * h);
    MatrixXc P = MatrixXc::Zero(2 * d, 2 * d);
    P.topLeftCorner(d, d).setIdentity();
    MatrixXc St = MatrixXc::Zero(2 * d, 2 * d);
    St.topLeftCorner(d, d) = sys.S.cast<cplx>();
    const MatrixXc& N = s0.N;
    const MatrixXc res = Nt + 2.0 * std::conj(alpha) * N * P * N - St.transpose() * N - N * St;
    const cplx phit = (sp.phi - sm.phi) / (2.0 * h);
    RiccatiResidual r;
    r.res_N = spectral_norm(res);
    r.res_phi = std::abs(phit + (0.5 * d / t + delta) * s0.phi);
    return r;
}

double truncation_radius(const SpectralQuantities& sq, double t, double eta_p, double tol) {
    const double sigma = std::sqrt(4.0 * t * sq.a_max * sq.a_max / sq.a0);
    return sigma * (std::sqrt(std::log(1.0 / tol) + sq.d) + eta_p * sigma / 2.0);
}

KernelMoments kernel_moments_all(const OUSystem& sys, double t, const QuadratureOptions& opt) {
    require_positive_time(t);
    const KernelEvaluator ev(sys, t);
    const SpectralQuantities sq = spectral_quantities(sys, 0.0, 1.0);
    const int d = sys.d;
    const int n = sys.N;
    const double scale = std::sqrt(t * sq.a_max * sq.a_max / sq.a0);
    const double sigma_env = 2.0 * scale;
    const double R = truncation_radius(sq, t, 0.0, 1e-16) + sigma_env;

    // The tensor-product rule is applied to the eigen-basis factors, which separate over the axes:
    // the d-fold node sum equals the product of the per-axis sums.
    auto evaluate = [&](int refine, std::array<std::vector<cplx>, 3>& axis_sums, double& mass) {
        const Rule1D rule = box_rule(-R, R, scale, opt.order, refine);
        for (int k = 0; k < 3; ++k) axis_sums[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(n), 0.0);
        std::vector<double> abs_sum(static_cast<std::size_t>(n), 0.0);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double x = rule.x[q];
            const double w = rule.w[q];
            for (int m = 0; m < n; ++m) {
                const cplx e = std::exp(-x * x * ev.inv_4t_lambda()(m)) * w;
                axis_sums[0][static_cast<std::size_t>(m)] += e;
                axis_sums[1][static_cast<std::size_t>(m)] += e * x;
                axis_sums[2][static_cast<std::size_t>(m)] += e * x * x;
                abs_sum[static_cast<std::size_t>(m)] += std::abs(e);
            }
        }
        mass = 0.0;
        for (int m = 0; m < n; ++m)
            mass += std::abs(ev.prefactor()(m)) * std::pow(abs_sum[static_cast<std::size_t>(m)], d);
    };

    auto build = [&](const std::array<std::vector<cplx>, 3>& s) {
        KernelMoments km;
        VectorXc v0(n);
        std::vector<VectorXc> v1(static_cast<std::size_t>(d), VectorXc(n));
        std::vector<std::vector<VectorXc>> v2(static_cast<std::size_t>(d),
                                              std::vector<VectorXc>(static_cast<std::size_t>(d), VectorXc(n)));
        for (int m = 0; m < n; ++m) {
            const auto mm = static_cast<std::size_t>(m);
            const cplx p = ev.prefactor()(m);
            const cplx s0 = s[0][mm], s1 = s[1][mm], s2 = s[2][mm];
            v0(m) = p * std::pow(s0, d);
            for (int i = 0; i < d; ++i) {
                v1[static_cast<std::size_t>(i)](m) = p * s1 * std::pow(s0, d - 1);
                for (int j = 0; j < d; ++j) {
                    v2[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)](m) =
                        i == j ? p * s2 * std::pow(s0, d - 1) : p * s1 * s1 * std::pow(s0, d - 2);
                }
            }
        }
        km.m0 = ev.assemble(v0);
        for (int i = 0; i < d; ++i) {
            km.m1.push_back(ev.assemble(v1[static_cast<std::size_t>(i)]));
            km.m2.emplace_back();
            for (int j = 0; j < d; ++j) km.m2.back().push_back(ev.assemble(v2[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]));
        }
        return km;
    };

    auto diff = [&](const KernelMoments& a, const KernelMoments& b) {
        double e = spectral_norm(a.m0 - b.m0);
        for (int i = 0; i < d; ++i) {
            e = std::max(e, spectral_norm(a.m1[static_cast<std::size_t>(i)] - b.m1[static_cast<std::size_t>(i)]) / scale);
            for (int j = 0; j < d; ++j)
                e = std::max(e, spectral_norm(a.m2[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -
                                              b.m2[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) /
                                    (scale * scale));
        }
        return e;
    };

    std::array<std::vector<cplx>, 3> sums;
    double mass = 0.0;
    evaluate(0, sums, mass);
    KernelMoments coarse = build(sums);
    const double kappa = sq.kappa;
    double tail = 0.0;
    for (int m = 0; m < n; ++m) tail = std::max(tail, std::abs(ev.prefactor()(m)));
    tail *= kappa * sphere_area(d) * envelope_tail(d + 1.0, sigma_env, 0.0, R);
    for (int refine = 1; refine <= opt.max_refinements; ++refine) {
        evaluate(refine, sums, mass);
        KernelMoments fine = build(sums);
        const double err = diff(fine, coarse);
        fine.est_error = err + tail;
        fine.nodes = static_cast<long>(std::pow(static_cast<double>(box_rule(-R, R, scale, opt.order, refine).size()), d));
        if (err <= 10.0 * opt.tol * std::max(mass * kappa, 1e-300)) return fine;
        coarse = std::move(fine);
    }
    raise(ErrorCode::QuadratureNotConverged, "kernel moments did not converge");
}

MatrixQuadrature kernel_moments(const OUSystem& sys, double t, int order, int i, int j,
                                const QuadratureOptions& opt) {
    if (order < 0 || order > 2) raise(ErrorCode::InvalidInput, "moment order must be 0, 1 or 2");
    if (order >= 1) require_index(sys, i);
    if (order == 2) require_index(sys, j);
    const KernelMoments km = kernel_moments_all(sys, t, opt);
    MatrixQuadrature r;
    r.est_error = km.est_error;
    r.nodes = km.nodes;
    if (order == 0) r.value = km.m0;
    else if (order == 1) r.value = km.m1[static_cast<std::size_t>(i)];
    else r.value = km.m2[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return r;
}

double bound_C(int level, const SpectralQuantities& sq, double t, const BoundExtras& extra) {
    if (level < 1 || level > 6) raise(ErrorCode::InvalidInput, "bound level must be in 1..6");
    require_positive_time(t);
    const double d = sq.d;
    const double z = sq.nu * t;
    const double sz = std::sqrt(z);
    auto g = [&](double a) { return gamma_ratio(a, 0.5 * d); };
    auto M = [&](double a, double b) { return kummer_1f1(a, b, z).real(); };
    const int base = level <= 3 ? level : level - 3;
    double bracket = 0.0;
    double pref = sq.kappa * std::exp(-sq.b0 * t);
    if (base == 1) {
        bracket = M(0.5 * d, 0.5) + 2.0 * g(0.5 * (d + 1.0)) * sz * M(0.5 * (d + 1.0), 1.5);
        pref *= std::pow(sq.a1, 0.5 * d);
    } else if (base == 2) {
        bracket = g(0.5 * (d + 1.0)) * M(0.5 * (d + 1.0), 0.5) + 2.0 * g(0.5 * (d + 2.0)) * sz * M(0.5 * (d + 2.0), 1.5);
        pref *= std::pow(sq.a1, 0.5 * (d + 1.0)) / std::sqrt(t * sq.a_min);
    } else {
        const double delta = extra.delta_ij ? 1.0 : 0.0;
        bracket = g(0.5 * (d + 2.0)) * M(0.5 * (d + 2.0), 0.5) + 2.0 * g(0.5 * (d + 3.0)) * sz * M(0.5 * (d + 3.0), 1.5) +
                  delta * 0.5 / sq.a1 * M(0.5 * d, 0.5) + delta / sq.a1 * g(0.5 * (d + 1.0)) * sz * M(0.5 * (d + 1.0), 1.5);
        pref *= std::pow(sq.a1, 0.5 * (d + 2.0)) / (t * sq.a_min);
    }
    if (level <= 3) return pref * bracket;
    const double p = std::isinf(extra.p) ? 1.0 : extra.p;
    if (!(p >= 1.0)) raise(ErrorCode::InvalidInput, "p must be >= 1");
    return extra.C_theta * pref * std::pow(bracket, 1.0 / p);
}

C78 bound_C78(const SpectralQuantities& sq, double p_in, double C_theta, double vartheta) {
    if (!(vartheta > 0.0 && vartheta < 1.0)) raise(ErrorCode::InvalidInput, "vartheta must lie in (0, 1)");
    const double p = std::isinf(p_in) ? 1.0 : p_in;
    if (!(p >= 1.0)) raise(ErrorCode::InvalidInput, "p must be >= 1");
    const double d = sq.d;
    const double r = vartheta / (1.0 - vartheta);
    const double sr = std::sqrt(r);
    auto F = [&](double a, double b, double c) { return gauss_2f1(a, b, c, -r).real(); };
    const double sqrt_pi = std::sqrt(kPi);
    const double g1 = gamma_ratio(0.5 * (d + 1.0), 0.5 * d);
    const double g2 = gamma_ratio(0.5 * (d + 2.0), 0.5 * d);
    C78 c;
    const double b7 = F(-0.5 * (d - 1.0), 1.0, 0.5) + sqrt_pi * g1 * sr * F(-0.5 * (d - 2.0), 1.5, 1.5);
    c.C7 = C_theta * sq.kappa * std::pow(sq.a1, 0.5 * d) * std::pow(1.0 / (1.0 - vartheta), 1.0 / p) *
           std::pow(b7, 1.0 / p);
    const double b8 = g1 * F(-0.5 * d, 0.5, 0.5) + 2.0 * g2 / sqrt_pi * sr * F(-0.5 * (d - 1.0), 1.0, 1.5);
    c.C8 = C_theta * sq.kappa * std::pow(sq.a1, 0.5 * (d + 1.0)) * sqrt_pi / std::sqrt(sq.a_min) *
           std::pow(1.0 / (1.0 - vartheta), 0.5 / p) * std::pow(b8, 1.0 / p);
    return c;
}

ScalarQuadrature weighted_kernel_l1(const OUSystem& sys, int level, double eta_p, double t, int i, int j,
                                    double tol) {
    if (level < 0 || level > 2) raise(ErrorCode::InvalidInput, "level must be 0, 1 or 2");
    if (!(eta_p >= 0.0)) raise(ErrorCode::InvalidInput, "eta_p must be non-negative");
    require_index(sys, i);
    require_index(sys, j);
    const KernelEvaluator ev(sys, t);
    const SpectralQuantities sq = spectral_quantities(sys, 0.0, 1.0);
    const int d = sys.d;
    const int n = sys.N;
    const double scale = std::sqrt(t * sq.a_max * sq.a_max / sq.a0);
    const double sigma_env = 2.0 * scale;
    const double R = truncation_radius(sq, t, eta_p, 1e-16) + sigma_env;
    std::vector<double> breaks;
    for (double r = 0.0; r < R; r += scale) breaks.push_back(r);
    breaks.push_back(R);

    const VectorXc& inv2 = ev.inv_2t_lambda();
    MatrixXc work(n, n);
    VectorXc v(n);
    auto norm_of = [&](const VectorXc& diag) {
        assemble_into(sys, diag.data(), work);
        return spectral_norm(work);
    };

    // Angular integrals over the unit sphere of |w_1|^a |w_2|^b.
    auto angular = [&](double a, double b) {
        return 2.0 * std::tgamma(0.5 * (a + 1.0)) * std::tgamma(0.5 * (b + 1.0)) * std::pow(std::sqrt(kPi), d - 2) /
               std::tgamma(0.5 * (a + b + d));
    };

    double value = 0.0;
    double err = 0.0;
    double tail_power = d - 1.0 + level;
    if (level < 2 || i != j) {
        double ang = sphere_area(d);
        if (level == 1) ang = angular(1.0, 0.0);
        if (level == 2) ang = angular(1.0, 1.0);
        auto f = [&](double r) {
            const VectorXc k = ev.diagonal(r * r);
            for (int m = 0; m < n; ++m) {
                cplx c = k(m);
                if (level >= 1) c *= inv2(m);
                if (level == 2) c *= inv2(m);
                v(m) = c;
            }
            return std::pow(r, d - 1 + level) * std::exp(eta_p * r) * norm_of(v);
        };
        auto res = integrate_adaptive(f, breaks, 0.0, tol, 20000);
        if (!res.converged) raise(ErrorCode::QuadratureNotConverged, "weighted kernel integral did not converge");
        value = ang * res.value;
        err = ang * res.est_error;
    } else {
        // K^{ii}: the norm depends on r and on c = <w, e^{tS} e_i>; integrate c = cos(phi) with the
        // sphere density sin^{d-2}(phi).
        const double ang = sphere_area(d - 1) * 2.0;
        auto inner = [&](double phi) {
            const double c = std::cos(phi);
            auto f = [&](double r) {
                const VectorXc k = ev.diagonal(r * r);
                for (int m = 0; m < n; ++m) v(m) = k(m) * (inv2(m) * inv2(m) * r * r * c * c - inv2(m));
                return std::pow(r, d - 1) * std::exp(eta_p * r) * norm_of(v);
            };
            auto res = integrate_adaptive(f, breaks, 0.0, 0.1 * tol, 20000);
            if (!res.converged) raise(ErrorCode::QuadratureNotConverged, "weighted kernel integral did not converge");
            return std::pow(std::sin(phi), d - 2) * res.value;
        };
        auto res = integrate_adaptive(inner, std::vector<double>{0.0, 0.25 * kPi, 0.5 * kPi}, 0.0, tol, 4000);
        if (!res.converged) raise(ErrorCode::QuadratureNotConverged, "weighted kernel integral did not converge");
        value = ang * res.value;
        err = ang * res.est_error;
        tail_power = d + 1.0;
    }
    double pmax = 0.0;
    for (int m = 0; m < n; ++m) pmax = std::max(pmax, std::abs(ev.prefactor()(m)) * std::max(1.0, std::abs(inv2(m)) * std::abs(inv2(m))));
    const double tail = sq.kappa * pmax * sphere_area(d) * envelope_tail(tail_power, sigma_env, eta_p, R) *
                        std::max(1.0, 1.0 / (2.0 * t * sq.a_min));
    return {value, err + tail};
}

ResidualResult chapman_kolmogorov_residual(const OUSystem& sys, const VectorXr& x, const VectorXr& xi, double t1,
                                           double t2, const QuadratureOptions& opt) {
    require_positive_time(t1);
    require_positive_time(t2);
    const int d = sys.d;
    const int n = sys.N;
    if (x.size() != d || xi.size() != d) raise(ErrorCode::InvalidInput, "point dimension mismatch");
    const KernelEvaluator e1(sys, t1), e2(sys, t2), e12(sys, t1 + t2);
    const VectorXr c1 = e1.rotation() * x;
    const VectorXr c2 = e2.rotation().transpose() * xi;

    // Box covering the modulus of the product of the two Gaussian factors, per eigen-component.
    const double rho = std::sqrt(std::log(1e14) + d);
    VectorXr lo = VectorXr::Constant(d, std::numeric_limits<double>::infinity());
    VectorXr hi = -lo;
    double width = std::numeric_limits<double>::infinity();
    for (int m = 0; m < n; ++m) {
        const double a1 = e1.inv_4t_lambda()(m).real();
        const double a2 = e2.inv_4t_lambda()(m).real();
        const VectorXr center = (a1 * c1 + a2 * c2) / (a1 + a2);
        const double w = 1.0 / std::sqrt(a1 + a2);
        width = std::min(width, w);
        lo = lo.cwiseMin((center.array() - rho * w).matrix());
        hi = hi.cwiseMax((center.array() + rho * w).matrix());
    }

    const MatrixXc target = e12.H(x, xi);
    const double tnorm = spectral_norm(target);

    auto integrate = [&](int refine, long& count) {
        std::vector<Rule1D> rules;
        for (int k = 0; k < d; ++k) rules.push_back(box_rule(lo(k), hi(k), width, opt.order, refine));
        // Per-axis factors of exp(-|c1 - z|^2/(4 t1 lambda)) and exp(-|z - c2|^2/(4 t2 lambda));
        // |e^{t2 S} z - xi| = |z - e^{-t2 S} xi| since e^{t2 S} is orthogonal.
        std::vector<std::vector<cplx>> f1(static_cast<std::size_t>(d)), f2(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) {
            const Rule1D& r = rules[static_cast<std::size_t>(k)];
            f1[static_cast<std::size_t>(k)].resize(r.size() * static_cast<std::size_t>(n));
            f2[static_cast<std::size_t>(k)].resize(r.size() * static_cast<std::size_t>(n));
            for (std::size_t q = 0; q < r.size(); ++q)
                for (int m = 0; m < n; ++m) {
                    const double u1 = c1(k) - r.x[q];
                    const double u2 = r.x[q] - c2(k);
                    f1[static_cast<std::size_t>(k)][q * static_cast<std::size_t>(n) + static_cast<std::size_t>(m)] =
                        std::exp(-u1 * u1 * e1.inv_4t_lambda()(m));
                    f2[static_cast<std::size_t>(k)][q * static_cast<std::size_t>(n) + static_cast<std::size_t>(m)] =
                        std::exp(-u2 * u2 * e2.inv_4t_lambda()(m));
                }
        }
        std::vector<const Rule1D*> axes;
        for (const Rule1D& r : rules) axes.push_back(&r);
        MatrixXc acc = MatrixXc::Zero(n, n);
        MatrixXc H1(n, n), H2(n, n);
        std::vector<cplx> k1(static_cast<std::size_t>(n)), k2(static_cast<std::size_t>(n));
        count = 0;
        for_each_tensor_node(axes, [&](const std::vector<std::size_t>& idx) {
            double w = 1.0;
            for (int m = 0; m < n; ++m) {
                k1[static_cast<std::size_t>(m)] = e1.prefactor()(m);
                k2[static_cast<std::size_t>(m)] = e2.prefactor()(m);
            }
            for (int k = 0; k < d; ++k) {
                const std::size_t q = idx[static_cast<std::size_t>(k)];
                w *= rules[static_cast<std::size_t>(k)].w[q];
                for (int m = 0; m < n; ++m) {
                    k1[static_cast<std::size_t>(m)] *= f1[static_cast<std::size_t>(k)][q * static_cast<std::size_t>(n) + static_cast<std::size_t>(m)];
                    k2[static_cast<std::size_t>(m)] *= f2[static_cast<std::size_t>(k)][q * static_cast<std::size_t>(n) + static_cast<std::size_t>(m)];
                }
            }
            assemble_into(sys, k1.data(), H1);
            assemble_into(sys, k2.data(), H2);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    cplx s = 0.0;
                    for (int c = 0; c < n; ++c) s += H1(a, c) * H2(c, b);
                    acc(a, b) += w * s;
                }
            ++count;
        });
        return acc;
    };

    long count = 0;
    MatrixXc coarse = integrate(0, count);
    for (int refine = 1; refine <= opt.max_refinements; ++refine) {
        MatrixXc fine = integrate(refine, count);
        const double err = spectral_norm(fine - coarse);
        if (err <= 10.0 * opt.tol * tnorm) {
            ResidualResult r;
            r.residual = spectral_norm(fine - target) / tnorm;
            r.est_error = err / tnorm;
            r.nodes = count;
            return r;
        }
        coarse = std::move(fine);
    }
    raise(ErrorCode::QuadratureNotConverged, "Chapman-Kolmogorov quadrature did not converge");
}

DiracProbe dirac_limit_probe(const OUSystem& sys, const VectorField& phi, const VectorXr& x,
                             const std::vector<double>& t_sequence, double phi_scale,
                             const QuadratureOptions& opt) {
    for (std::size_t k = 1; k < t_sequence.size(); ++k) {
        if (!(t_sequence[k] < t_sequence[k - 1])) raise(ErrorCode::InvalidInput, "t_sequence must be decreasing");
    }
    const int d = sys.d;
    const int n = sys.N;
    DiracProbe out;
    for (double t : t_sequence) {
        const KernelEvaluator ev(sys, t);
        const VectorXr c = ev.rotation() * x;
        const double rho = std::sqrt(std::log(1e16) + d);
        const double width = std::min(ev.sigma(), phi_scale);
        const MatrixXc eB = matrix_function(sys, [t](cplx z) { return std::exp(-z * t); }, Which::B);
        const VectorXc target = eB * phi(x);

        auto integrate = [&](int refine) {
            std::vector<Rule1D> rules;
            for (int k = 0; k < d; ++k) rules.push_back(box_rule(c(k) - rho * ev.sigma(), c(k) + rho * ev.sigma(), width, opt.order, refine));
            std::vector<const Rule1D*> axes;
            for (const Rule1D& r : rules) axes.push_back(&r);
            VectorXc acc = VectorXc::Zero(n);
            VectorXr xi(d);
            MatrixXc H(n, n);
            for_each_tensor_node(axes, [&](const std::vector<std::size_t>& idx) {
                double w = 1.0;
                for (int k = 0; k < d; ++k) {
                    xi(k) = rules[static_cast<std::size_t>(k)].x[idx[static_cast<std::size_t>(k)]];
                    w *= rules[static_cast<std::size_t>(k)].w[idx[static_cast<std::size_t>(k)]];
                }
                const VectorXc kd = ev.diagonal((c - xi).squaredNorm());
                assemble_into(sys, kd.data(), H);
                acc += w * (H * phi(xi));
            });
            return acc;
        };

        VectorXc coarse = integrate(0);
        bool done = false;
        for (int refine = 1; refine <= opt.max_refinements && !done; ++refine) {
            VectorXc fine = integrate(refine);
            const double err = (fine - coarse).norm();
            if (err <= 10.0 * opt.tol * std::max(target.norm(), fine.norm())) {
                out.errors.push_back((fine - target).norm());
                out.est_errors.push_back(err);
                done = true;
            }
            coarse = std::move(fine);
        }
        if (!done) raise(ErrorCode::QuadratureNotConverged, "Dirac-limit quadrature did not converge");
    }
    return out;
}

}  // namespace oukit
