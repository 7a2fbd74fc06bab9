#include "oukit/semigroup.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "oukit/errors.hpp"
#include "oukit/quadrature.hpp"

namespace oukit {

namespace {

std::vector<VectorXr> grid_points(const GridSpec& spec) {
    std::vector<VectorXr> pts(spec.nodes());
    for (std::size_t k = 0; k < pts.size(); ++k) pts[k] = spec.node(k);
    return pts;
}

GridFunction from_values(const GridSpec& spec, int N, const std::vector<VectorXc>& vals) {
    GridFunction g;
    g.spec = spec;
    g.N = N;
    g.values.assign(spec.nodes() * static_cast<std::size_t>(N), 0.0);
    for (std::size_t k = 0; k < vals.size(); ++k) g.set(k, vals[k]);
    return g;
}

void require_time(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) raise(ErrorCode::InvalidInput, "time must be finite and non-negative");
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

// A Delta v + <Sx, grad v> - B v from values at x, x +- h e_i.
VectorXc generator_from_stencil(const OUSystem& sys, const VectorXr& x, double h, const VectorXc& center,
                                const std::vector<VectorXc>& plus, const std::vector<VectorXc>& minus) {
    const int d = sys.d;
    VectorXc lap = VectorXc::Zero(sys.N);
    VectorXc drift = VectorXc::Zero(sys.N);
    const VectorXr Sx = sys.S * x;
    for (int i = 0; i < d; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        lap += (plus[ii] - 2.0 * center + minus[ii]) / (h * h);
        drift += Sx(i) * (plus[ii] - minus[ii]) / (2.0 * h);
    }
    return sys.A * lap + drift - sys.B * center;
}

}  // namespace

GridFunction apply_semigroup(const OUSystem& sys, const GridFunction& v, double t, const SemigroupOptions& opt) {
    require_time(t);
    if (t == 0.0) return v;
    const GridPropagator prop(sys, v, opt);
    return from_values(v.spec, v.N, prop.semigroup(t, grid_points(v.spec), 0).value);
}

std::vector<GridFunction> semigroup_gradient(const OUSystem& sys, const GridFunction& v, double t,
                                             const SemigroupOptions& opt) {
    if (!(t > 0.0)) raise(ErrorCode::InvalidInput, "derivatives of T(t)v need t > 0");
    const GridPropagator prop(sys, v, opt);
    const PointValues pv = prop.semigroup(t, grid_points(v.spec), 1);
    std::vector<GridFunction> out;
    for (int i = 0; i < sys.d; ++i) {
        std::vector<VectorXc> vals(pv.grad.size());
        for (std::size_t k = 0; k < vals.size(); ++k) vals[k] = pv.grad[k][static_cast<std::size_t>(i)];
        out.push_back(from_values(v.spec, v.N, vals));
    }
    return out;
}

std::vector<std::vector<GridFunction>> semigroup_hessian(const OUSystem& sys, const GridFunction& v, double t,
                                                         const SemigroupOptions& opt) {
    if (!(t > 0.0)) raise(ErrorCode::InvalidInput, "derivatives of T(t)v need t > 0");
    const GridPropagator prop(sys, v, opt);
    const PointValues pv = prop.semigroup(t, grid_points(v.spec), 2);
    std::vector<std::vector<GridFunction>> out(static_cast<std::size_t>(sys.d));
    for (int i = 0; i < sys.d; ++i)
        for (int j = 0; j < sys.d; ++j) {
            std::vector<VectorXc> vals(pv.hess.size());
            for (std::size_t k = 0; k < vals.size(); ++k) vals[k] = pv.hess[k][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            out[static_cast<std::size_t>(i)].push_back(from_values(v.spec, v.N, vals));
        }
    return out;
}

VectorXc semigroup_at(const OUSystem& sys, const Field& g, double t, const VectorXr& x, const SemigroupOptions& opt) {
    require_time(t);
    if (t == 0.0) return g.f(x);
    const FieldPropagator prop(sys, g, opt);
    return prop.semigroup(t, {x}, 0).value[0];
}

GridFunction apply_diffusion(const OUSystem& sys, const GridFunction& v, double t, const SemigroupOptions& opt) {
    if (!(t > 0.0)) raise(ErrorCode::InvalidInput, "diffusion factor needs t > 0");
    const GridPropagator prop(sys, v, opt);
    return from_values(v.spec, v.N, prop.diffusion(t, grid_points(v.spec)));
}

GridFunction grid_derivative_fd(const GridFunction& v, int i) {
    const GridSpec& s = v.spec;
    if (i < 0 || i >= s.dim()) raise(ErrorCode::InvalidInput, "axis out of range");
    const int n = s.count[static_cast<std::size_t>(i)];
    if (n < 3) raise(ErrorCode::EmptyGrid, "finite differences need 3 nodes per axis");
    const double h = s.h(i);
    GridFunction out = v;
    for (std::size_t node = 0; node < s.nodes(); ++node) {
        std::vector<int> idx = s.multi_index(node);
        const int k = idx[static_cast<std::size_t>(i)];
        auto at = [&](int kk) {
            idx[static_cast<std::size_t>(i)] = kk;
            return v.at(s.flat_index(idx));
        };
        VectorXc dv;
        if (k == 0) dv = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
        else if (k == n - 1) dv = (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h);
        else dv = (at(k + 1) - at(k - 1)) / (2.0 * h);
        out.set(node, dv);
    }
    return out;
}

double grid_norm(const GridFunction& v, const NormSpec& n) {
    NormOptions o;
    o.boundary_fraction = n.boundary_fraction;
    if (std::isinf(n.p)) return weighted_sup_norm(v, n.weight, o).value;
    return weighted_lp_norm(v, n.weight, n.p, o).value;
}

GridFunction difference(const GridFunction& a, const GridFunction& b) {
    if (a.values.size() != b.values.size() || a.N != b.N) raise(ErrorCode::InvalidInput, "grid functions differ in shape");
    GridFunction out = a;
    for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] -= b.values[k];
    return out;
}

double semigroup_composition_residual(const OUSystem& sys, const GridFunction& v, double s, double t,
                                      const NormSpec& n, const SemigroupOptions& opt) {
    require_time(s);
    require_time(t);
    const GridFunction ts = apply_semigroup(sys, apply_semigroup(sys, v, s, opt), t, opt);
    const GridFunction direct = apply_semigroup(sys, v, t + s, opt);
    const double ref = grid_norm(direct, n);
    if (ref == 0.0) return 0.0;
    return grid_norm(difference(ts, direct), n) / ref;
}

double factorization_residual(const OUSystem& sys, const GridFunction& v, double t, double boundary_fraction,
                              const SemigroupOptions& opt) {
    if (!(t > 0.0)) raise(ErrorCode::InvalidInput, "factorization check needs t > 0");
    const GridPropagator prop(sys, v, opt);
    const InteriorRange range = interior_range(v.spec, boundary_fraction);
    std::vector<VectorXr> xs, ys;
    const MatrixXr R = rotation(sys.S, t);
    for (std::size_t k = 0; k < v.spec.nodes(); ++k) {
        if (!range.contains(v.spec.multi_index(k))) continue;
        xs.push_back(v.spec.node(k));
        ys.push_back(R * xs.back());
    }
    const std::vector<VectorXc> tv = prop.semigroup(t, xs, 0).value;
    const std::vector<VectorXc> gv = prop.diffusion(t, ys);
    double diff = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        diff = std::max(diff, (tv[k] - gv[k]).norm());
        scale = std::max(scale, tv[k].norm());
    }
    return scale > 0.0 ? diff / scale : diff;
}

VectorXc apply_generator_fd(const OUSystem& sys, const VectorField& v, const VectorXr& x, double h) {
    if (!(h > 0.0)) raise(ErrorCode::InvalidInput, "step must be positive");
    if (x.size() != sys.d) raise(ErrorCode::InvalidInput, "point dimension mismatch");
    std::vector<VectorXc> plus, minus;
    for (int i = 0; i < sys.d; ++i) {
        VectorXr e = VectorXr::Zero(sys.d);
        e(i) = h;
        plus.push_back(v(x + e));
        minus.push_back(v(x - e));
    }
    return generator_from_stencil(sys, x, h, v(x), plus, minus);
}

VectorXc apply_generator_fd(const OUSystem& sys, const GridFunction& v, const VectorXr& x, double h,
                            Interpolation kind) {
    for (int i = 0; i < sys.d; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        if (x(i) - 2.0 * h < v.spec.min[ii] || x(i) + 2.0 * h > v.spec.max[ii])
            raise(ErrorCode::TooCloseToBoundary, "point must lie at least 2h inside the grid");
    }
    return apply_generator_fd(sys, [&](const VectorXr& y) { return interpolate(v, y, kind); }, x, h);
}

OmegaBound omega_bound(const SpectralQuantities& sq, OmegaMode mode, double p, double C_theta, double epsilon) {
    OmegaBound ob;
    const double base = sq.kappa * std::pow(sq.a1, 0.5 * sq.d);
    if (mode == OmegaMode::cb_unweighted) {
        ob.omega = -sq.b0;
        ob.M = base;
        ob.C_star = 1.0;
        return ob;
    }
    if (!(p >= 1.0) || std::isinf(p)) raise(ErrorCode::InvalidInput, "p must lie in [1, inf)");
    if (!(epsilon > 0.0)) raise(ErrorCode::InvalidInput, "epsilon must be positive");
    ob.omega = -sq.b0 + (1.0 + epsilon) * sq.nu / p;
    BoundExtras ex;
    ex.p = p;
    ex.C_theta = C_theta;
    const double t_max = sq.nu > 0.0 ? std::min(1e3, 600.0 / sq.nu) : 1e3;
    double cstar = 0.0;
    const int count = 400;
    for (int k = 0; k < count; ++k) {
        const double t = 1e-3 * std::pow(t_max / 1e-3, static_cast<double>(k) / (count - 1));
        const double v = bound_C(4, sq, t, ex) * std::exp(-ob.omega * t) / (C_theta * base);
        if (std::isfinite(v)) cstar = std::max(cstar, v);
    }
    ob.C_star = 1.05 * cstar;
    ob.M = C_theta * base * ob.C_star;
    return ob;
}

TimeRule resolvent_time_rule(const OUSystem& sys, cplx lambda, double eta, double p, double C_theta,
                             const ResolventOptions& opt) {
    const SpectralQuantities sq = spectral_quantities(sys, eta, p);
    const SpectralQuantities sq0 = spectral_quantities(sys, 0.0, 1.0);
    TimeRule rule;
    rule.omega = eta == 0.0 ? -sq.b0 : -sq.b0 + (1.0 + opt.epsilon) * sq.nu / p;
    const double margin = lambda.real() - rule.omega;
    if (!(margin >= opt.min_margin))
        raise(ErrorCode::SpectralMarginTooSmall, "Re(lambda) - omega = " + std::to_string(margin) + " is below the margin");

    BoundExtras ex;
    ex.p = p;
    ex.C_theta = C_theta;
    auto tail = [&](double T) {
        auto f1 = [&](double t) { return std::exp(-lambda.real() * t) * bound_C(4, sq, t, ex); };
        auto f0 = [&](double t) { return std::exp(-lambda.real() * t) * bound_C(4, sq0, t); };
        const double end = T + 80.0 / margin;
        const double a = integrate_adaptive(f1, T, end, 0.0, 1e-6, 400).value;
        const double b = integrate_adaptive(f0, T, end, 0.0, 1e-6, 400).value;
        return std::max(a, b);
    };
    double T = std::max(2.0, 10.0 / margin);
    double tl = tail(T);
    for (int k = 0; k < 40 && !(tl < opt.tail_tol); ++k) {
        T *= 1.5;
        tl = tail(T);
    }
    if (!(tl < opt.tail_tol)) raise(ErrorCode::QuadratureNotConverged, "time horizon for the resolvent not found");
    rule.T = T;
    rule.tail_bound = tl;

    const double S = std::sqrt(T);
    std::vector<double> geo{S};
    while (geo.back() > 0.25 || geo.size() < 5) geo.push_back(geo.back() / 2.0);
    geo.push_back(0.0);
    std::reverse(geo.begin(), geo.end());
    for (int sub = 1; sub <= 64; sub *= 2) {
        std::vector<double> breaks;
        for (std::size_t k = 0; k + 1 < geo.size(); ++k)
            for (int j = 0; j < sub; ++j) breaks.push_back(geo[k] + (geo[k + 1] - geo[k]) * j / sub);
        breaks.push_back(S);
        const Rule1D r = composite_gauss_legendre(breaks, opt.gl_order);
        rule.t.clear();
        rule.w.clear();
        for (std::size_t k = 0; k < r.size(); ++k) {
            const double t = r.x[k] * r.x[k];
            rule.t.push_back(t);
            rule.w.push_back(2.0 * r.x[k] * r.w[k] * std::exp(-lambda * t));
        }
        double worst = 0.0;
        for (int m = 0; m < sys.N; ++m) {
            const cplx mu = lambda + sys.lambdaB(m);
            const cplx exact = (1.0 - std::exp(-mu * T)) / mu;
            cplx num = 0.0;
            for (std::size_t k = 0; k < rule.t.size(); ++k) num += rule.w[k] * std::exp(-sys.lambdaB(m) * rule.t[k]);
            worst = std::max(worst, std::abs(num - exact) / std::abs(exact));
        }
        if (worst <= opt.match_tol) return rule;
    }
    raise(ErrorCode::QuadratureNotConverged, "time quadrature for the resolvent did not converge");
}

ResolventGrid apply_resolvent(const OUSystem& sys, cplx lambda, const GridFunction& g, bool with_gradient,
                              const WeightFunction& weight, double p, const ResolventOptions& opt) {
    const double pp = std::isinf(p) ? 1.0 : p;
    const TimeRule rule = resolvent_time_rule(sys, lambda, weight.eta, pp, weight.C_theta, opt);
    const GridPropagator prop(sys, g, opt.semigroup);
    const std::vector<VectorXr> pts = grid_points(g.spec);
    std::vector<VectorXc> acc(pts.size(), VectorXc::Zero(sys.N));
    std::vector<std::vector<VectorXc>> gacc(static_cast<std::size_t>(sys.d), std::vector<VectorXc>(pts.size(), VectorXc::Zero(sys.N)));
    for (std::size_t k = 0; k < rule.t.size(); ++k) {
        const PointValues pv = prop.semigroup(rule.t[k], pts, with_gradient ? 1 : 0);
        for (std::size_t q = 0; q < pts.size(); ++q) {
            acc[q] += rule.w[k] * pv.value[q];
            if (with_gradient)
                for (int i = 0; i < sys.d; ++i) gacc[static_cast<std::size_t>(i)][q] += rule.w[k] * pv.grad[q][static_cast<std::size_t>(i)];
        }
    }
    ResolventGrid out;
    out.value = from_values(g.spec, g.N, acc);
    if (with_gradient)
        for (int i = 0; i < sys.d; ++i) out.grad.push_back(from_values(g.spec, g.N, gacc[static_cast<std::size_t>(i)]));
    out.tail_bound = rule.tail_bound;
    out.time_nodes = static_cast<int>(rule.t.size());
    return out;
}

std::vector<VectorXc> resolvent_at(const OUSystem& sys, cplx lambda, const Field& g, const std::vector<VectorXr>& points,
                                   const WeightFunction& weight, double p, const ResolventOptions& opt) {
    const double pp = std::isinf(p) ? 1.0 : p;
    const TimeRule rule = resolvent_time_rule(sys, lambda, weight.eta, pp, weight.C_theta, opt);
    const FieldPropagator prop(sys, g, opt.semigroup);
    std::vector<VectorXc> acc(points.size(), VectorXc::Zero(sys.N));
    for (std::size_t k = 0; k < rule.t.size(); ++k) {
        const PointValues pv = prop.semigroup(rule.t[k], points, 0);
        for (std::size_t q = 0; q < points.size(); ++q) acc[q] += rule.w[k] * pv.value[q];
    }
    return acc;
}

std::vector<double> strong_continuity_probe(const OUSystem& sys, const GridFunction& v, const NormSpec& n,
                                            const std::vector<double>& t_sequence, const SemigroupOptions& opt) {
    for (std::size_t k = 1; k < t_sequence.size(); ++k)
        if (!(t_sequence[k] < t_sequence[k - 1])) raise(ErrorCode::InvalidInput, "t_sequence must be decreasing");
    std::vector<double> out;
    const GridPropagator prop(sys, v, opt);
    const std::vector<VectorXr> pts = grid_points(v.spec);
    for (double t : t_sequence) {
        require_time(t);
        if (t == 0.0) {
            out.push_back(0.0);
            continue;
        }
        const GridFunction tv = from_values(v.spec, v.N, prop.semigroup(t, pts, 0).value);
        out.push_back(grid_norm(difference(tv, v), n));
    }
    return out;
}

std::vector<VerificationRecord> boundedness_check(const OUSystem& sys, const GridFunction& v, const NormSpec& n,
                                                  const std::vector<double>& t_values, double tolerance,
                                                  const SemigroupOptions& opt) {
    const auto start = std::chrono::steady_clock::now();
    const bool sup = std::isinf(n.p);
    const SpectralQuantities sq = spectral_quantities(sys, n.weight.eta, sup ? 1.0 : n.p);
    NormSpec whole = n;
    whole.boundary_fraction = 0.0;
    const double vnorm = grid_norm(v, whole);
    const GridPropagator prop(sys, v, opt);
    const std::vector<VectorXr> pts = grid_points(v.spec);
    const std::string tag = std::string(to_string(n.weight.kind)) + (sup ? " sup" : " p=" + std::to_string(n.p));
    std::vector<VerificationRecord> out;
    for (double t : t_values) {
        if (!(t > 0.0)) raise(ErrorCode::InvalidInput, "boundedness times must be positive");
        const std::string detail = tag + " t=" + std::to_string(t);
        const GridFunction tv = from_values(v.spec, v.N, prop.semigroup(t, pts, 0).value);
        BoundExtras ex;
        ex.p = n.p;
        ex.C_theta = n.weight.C_theta;
        out.push_back(upper_bound_record("boundedness.C4", "semigroup.norm_le_C4", grid_norm(tv, n),
                                         bound_C(4, sq, t, ex) * vnorm, tolerance, 0.0, detail));
        for (int i = 0; i < sys.d; ++i) {
            const GridFunction di = grid_derivative_fd(tv, i);
            out.push_back(upper_bound_record("boundedness.C5.d" + std::to_string(i), "semigroup.gradient_le_C5",
                                             grid_norm(di, n), bound_C(5, sq, t, ex) * vnorm, tolerance, 0.0, detail));
            for (int j = 0; j < sys.d; ++j) {
                BoundExtras exj = ex;
                exj.delta_ij = i == j;
                out.push_back(upper_bound_record("boundedness.C6.d" + std::to_string(j) + std::to_string(i),
                                                 "semigroup.hessian_le_C6", grid_norm(grid_derivative_fd(di, j), n),
                                                 bound_C(6, sq, t, exj) * vnorm, tolerance, 0.0, detail));
            }
        }
    }
    const double ms = elapsed_ms(start);
    for (VerificationRecord& r : out) {
        r.suite = "bounds";
        r.runtime_ms = ms;
    }
    return out;
}

std::vector<VerificationRecord> resolvent_estimate_check(const ResolventQuery& q) {
    if (q.sys == nullptr) raise(ErrorCode::InvalidInput, "resolvent query needs a system");
    const OUSystem& sys = *q.sys;
    const auto start = std::chrono::steady_clock::now();
    const double p = q.sup_mode ? 1.0 : q.p;
    if (!(p >= 1.0) || std::isinf(p)) raise(ErrorCode::InvalidInput, "p must lie in [1, inf)");
    if (!(q.vartheta > 0.0 && q.vartheta < 1.0)) raise(ErrorCode::InvalidInput, "vartheta must lie in (0, 1)");

    // Growth bound of the governing estimate.
    double omega = 0.0;
    const SpectralQuantities sq2 = spectral_quantities(sys, q.theta2.eta, p);
    if (q.sup_mode) {
        omega = -sq2.b0;
    } else {
        const SpectralQuantities sq1 = spectral_quantities(sys, q.theta1.eta, p);
        omega = -sq1.b0 + (1.0 + q.options.epsilon) * sq1.nu / p;
    }
    const double margin = q.lambda.real() - omega;
    if (!(margin >= q.options.min_margin))
        raise(ErrorCode::SpectralMarginTooSmall, "Re(lambda) - omega = " + std::to_string(margin) + " is below the margin");
    const double eta_cap = q.vartheta * sq2.a0 * margin / (sq2.a_max * sq2.a_max * p * p);
    if (q.theta2.eta * q.theta2.eta > eta_cap * (1.0 + 1e-12))
        raise(ErrorCode::HypothesisViolated, "eta2^2 = " + std::to_string(q.theta2.eta * q.theta2.eta) +
                                                 " exceeds the admissible " + std::to_string(eta_cap));

    std::vector<VerificationRecord> out;
    const NormSpec n2{q.theta2, q.sup_mode ? std::numeric_limits<double>::infinity() : p, q.boundary_fraction};
    NormSpec g_norm_spec = n2;
    g_norm_spec.boundary_fraction = 0.0;

    // Weight domination theta1 <= C theta2 observed on the grid.
    double dom = 0.0;
    for (std::size_t k = 0; k < q.g.spec.nodes(); ++k) {
        const VectorXr x = q.g.spec.node(k);
        dom = std::max(dom, eval_weight(q.theta1, x) / eval_weight(q.theta2, x));
    }
    {
        VerificationRecord r = upper_bound_record("resolvent.weight_domination", "weights.theta1_le_C_theta2", dom,
                                                  std::max(dom, 1.0), 0.0, 0.0, "observed sup of theta1/theta2 on the grid");
        out.push_back(r);
    }

    const ResolventGrid rg = apply_resolvent(sys, q.lambda, q.g, true, q.theta2, p, q.options);
    const C78 c78 = bound_C78(sq2, q.sup_mode ? std::numeric_limits<double>::infinity() : p, q.theta2.C_theta, q.vartheta);
    const double gnorm = grid_norm(q.g, g_norm_spec);
    const double vnorm = grid_norm(rg.value, n2);
    const std::string mode = q.sup_mode ? "sup" : "p=" + std::to_string(p);
    const std::string lam = "lambda=(" + std::to_string(q.lambda.real()) + "," + std::to_string(q.lambda.imag()) + ")";
    out.push_back(upper_bound_record("resolvent.weighted_norm_bound", "resolvent.C7_bound", vnorm, c78.C7 * gnorm / margin,
                                     q.tolerance, rg.tail_bound * gnorm, mode + " " + lam));
    for (int i = 0; i < sys.d; ++i) {
        const double dn = grid_norm(rg.grad[static_cast<std::size_t>(i)], n2);
        out.push_back(upper_bound_record("resolvent.derivative_bound.d" + std::to_string(i), "resolvent.C8_bound", dn,
                                         c78.C8 * gnorm / std::sqrt(margin), q.tolerance, 0.0, mode + " " + lam));
    }

    // Kernel-route gradient against finite differences of the grid output.
    {
        double diff = 0.0, scale = 0.0;
        const InteriorRange range = interior_range(q.g.spec, q.boundary_fraction);
        for (int i = 0; i < sys.d; ++i) {
            const GridFunction fd = grid_derivative_fd(rg.value, i);
            for (std::size_t k = 0; k < q.g.spec.nodes(); ++k) {
                if (!range.contains(q.g.spec.multi_index(k))) continue;
                diff = std::max(diff, (fd.at(k) - rg.grad[static_cast<std::size_t>(i)].at(k)).norm());
                scale = std::max(scale, rg.grad[static_cast<std::size_t>(i)].at(k).norm());
            }
        }
        const double h = q.g.spec.h(0);
        out.push_back(upper_bound_record("resolvent.derivative_crosscheck", "resolvent.kernel_vs_fd_gradient",
                                         scale > 0.0 ? diff / scale : diff, 0.05, 0.0, 0.0,
                                         "relative max difference, grid step " + std::to_string(h)));
    }

    if (q.sup_mode) {
        const double gsup = grid_norm(q.g, g_norm_spec);
        const double bound = c78.C7 * gsup / margin;
        double worst = 0.0;
        const InteriorRange range = interior_range(q.g.spec, q.boundary_fraction);
        for (std::size_t k = 0; k < q.g.spec.nodes(); ++k) {
            if (!range.contains(q.g.spec.multi_index(k))) continue;
            worst = std::max(worst, rg.value.at(k).norm() * eval_weight(q.theta2, q.g.spec.node(k)));
        }
        out.push_back(upper_bound_record("resolvent.pointwise_bound", "resolvent.pointwise_C7", worst, bound, q.tolerance,
                                         0.0, lam));
    }

    if (q.g_field) {
        const int d = sys.d;
        const double h = q.residual_h;
        std::mt19937_64 rng(kDefaultSeed);
        std::vector<VectorXr> centers;
        for (int k = 0; k < q.residual_points; ++k) {
            VectorXr x(d);
            for (int a = 0; a < d; ++a) {
                const auto aa = static_cast<std::size_t>(a);
                const double mid = 0.5 * (q.g.spec.min[aa] + q.g.spec.max[aa]);
                const double half = 0.5 * (q.g.spec.max[aa] - q.g.spec.min[aa]) * (1.0 - 2.0 * q.boundary_fraction);
                x(a) = k == 0 ? mid : mid + 0.5 * half * std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
            }
            centers.push_back(x);
        }
        std::vector<VectorXr> pts;
        for (const VectorXr& x : centers) {
            pts.push_back(x);
            for (int i = 0; i < d; ++i) {
                VectorXr e = VectorXr::Zero(d);
                e(i) = h;
                pts.push_back(x + e);
                pts.push_back(x - e);
            }
        }
        const std::vector<VectorXc> vals = resolvent_at(sys, q.lambda, *q.g_field, pts, q.theta2, p, q.options);
        double gmax = 0.0;
        for (std::size_t k = 0; k < q.g.spec.nodes(); ++k) gmax = std::max(gmax, q.g.at(k).norm());
        double worst = 0.0;
        std::size_t idx = 0;
        for (const VectorXr& x : centers) {
            const VectorXc center = vals[idx++];
            std::vector<VectorXc> plus, minus;
            for (int i = 0; i < d; ++i) {
                plus.push_back(vals[idx++]);
                minus.push_back(vals[idx++]);
            }
            const VectorXc Lv = generator_from_stencil(sys, x, h, center, plus, minus);
            const VectorXc res = q.lambda * center - Lv - q.g_field->f(x);
            worst = std::max(worst, res.norm());
        }
        out.push_back(upper_bound_record("resolvent.generator_residual", "resolvent.lambda_minus_L", worst / gmax, 1e-3,
                                         0.0, 0.0, lam + " h=" + std::to_string(h)));
    }
    const double ms = elapsed_ms(start);
    for (VerificationRecord& r : out) {
        r.suite = "resolvent";
        r.runtime_ms = ms;
    }
    return out;
}

GreensProbe greens_function_probe(const OUSystem& sys, const VectorXr& x, const VectorXr& xi, double T_max, double tol) {
    const SpectralQuantities sq = spectral_quantities(sys, 0.0, 1.0);
    if (!(sq.b0 > 0.0)) raise(ErrorCode::NonDecayingB, "the time integral needs min Re sigma(B) > 0");
    if ((x - xi).norm() == 0.0) raise(ErrorCode::InvalidInput, "x and xi must differ");
    if (!(T_max > 0.0)) raise(ErrorCode::InvalidInput, "T_max must be positive");
    auto integrand = [&](double t) -> MatrixXc {
        if (t <= 0.0) return MatrixXc::Zero(sys.N, sys.N);
        return KernelEvaluator(sys, t).H(x, xi);
    };
    std::vector<double> breaks{0.0};
    for (double b = 1e-3; b < T_max; b *= 2.0) breaks.push_back(b);
    breaks.push_back(T_max);
    const auto res = integrate_adaptive(integrand, breaks, 0.0, tol, 20000);
    if (!res.converged) raise(ErrorCode::QuadratureNotConverged, "Green's function time integral did not converge");
    auto env = [&](double t) {
        return sq.kappa * std::pow(4.0 * std::numbers::pi * t * sq.a_min, -0.5 * sys.d) * std::exp(-sq.b0 * t);
    };
    const double tail = integrate_adaptive(env, T_max, T_max + 80.0 / sq.b0, 0.0, 1e-6, 400).value;
    GreensProbe g;
    g.value = -res.value;
    g.est_error = res.est_error + tail;
    return g;
}

}  // namespace oukit
