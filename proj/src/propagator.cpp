#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "oukit/errors.hpp"
#include "oukit/parallel.hpp"
#include "oukit/quadrature.hpp"
#include "oukit/semigroup.hpp"

namespace oukit {

namespace {

struct Stencil {
    int first = 0;
    int len = 0;
    std::array<double, 4> w{};
};

bool use_cubic(Interpolation kind, int n) { return kind == Interpolation::cubic && n >= 4; }

// Cardinal weights of the interpolant on cell k (between nodes k and k+1) at position y.
Stencil cell_stencil(const GridSpec& spec, int axis, int k, double y, Interpolation kind) {
    const int n = spec.count[static_cast<std::size_t>(axis)];
    const double h = spec.h(axis);
    Stencil s;
    if (use_cubic(kind, n)) {
        s.first = std::clamp(k - 1, 0, n - 4);
        s.len = 4;
        const double u = (y - spec.coord(axis, s.first)) / h;
        s.w[0] = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
        s.w[1] = u * (u - 2.0) * (u - 3.0) / 2.0;
        s.w[2] = -u * (u - 1.0) * (u - 3.0) / 2.0;
        s.w[3] = u * (u - 1.0) * (u - 2.0) / 6.0;
    } else {
        s.first = k;
        s.len = 2;
        const double u = (y - spec.coord(axis, k)) / h;
        s.w[0] = 1.0 - u;
        s.w[1] = u;
    }
    return s;
}

int cell_of(const GridSpec& spec, int axis, double y) {
    const int n = spec.count[static_cast<std::size_t>(axis)];
    const int k = static_cast<int>(std::floor((y - spec.min[static_cast<std::size_t>(axis)]) / spec.h(axis)));
    return std::clamp(k, 0, n - 2);
}

struct AxisTable {
    int j0 = 0;
    int len = 0;
    std::array<std::vector<cplx>, 3> g;
};

// Quadrature offsets inside one cell with the interpolation weights of the edge and interior cells.
struct CellRule {
    std::vector<double> off;
    std::vector<double> w;
    int len = 0;                                            // stencil length
    std::array<std::vector<std::array<double, 4>>, 3> sw;  // first cell, interior cell, last cell
};

CellRule make_cell_rule(const GridSpec& spec, int axis, double panel, int order, Interpolation kind) {
    const int n = spec.count[static_cast<std::size_t>(axis)];
    const double h = spec.h(axis);
    const int panels = std::max(1, static_cast<int>(std::ceil(h / panel)));
    const double pw = h / panels;
    // Fewer points when the panel is short against the kernel panel scale.
    const int pts = pw <= 0.3 * panel ? std::min(order, 4) : (pw <= 0.6 * panel ? std::min(order, 6) : order);
    const Rule1D& gl = gauss_legendre(pts);
    CellRule cr;
    for (int p = 0; p < panels; ++p)
        for (std::size_t r = 0; r < gl.size(); ++r) {
            cr.off.push_back(p * pw + 0.5 * pw * (gl.x[r] + 1.0));
            cr.w.push_back(0.5 * pw * gl.w[r]);
        }
    const bool cubic = use_cubic(kind, n);
    cr.len = cubic ? 4 : 2;
    for (int pattern = 0; pattern < 3; ++pattern) {
        const int k = pattern == 0 ? 0 : (pattern == 1 ? std::min(1, n - 2) : n - 2);
        for (double o : cr.off) {
            const Stencil st = cell_stencil(spec, axis, k, spec.coord(axis, k) + o, kind);
            cr.sw[static_cast<std::size_t>(pattern)].push_back(st.w);
        }
    }
    return cr;
}

// G_q(c)[j] = int (c - y)^q exp(-(c - y)^2 inv4) phi_j(y) dy over the cells meeting the kernel window.
void build_axis_table(const GridSpec& spec, int axis, double c, cplx inv4, double half_width, const CellRule& cr,
                      int qmax, Interpolation kind, AxisTable& out) {
    const auto a = static_cast<std::size_t>(axis);
    const int n = spec.count[a];
    const double h = spec.h(axis);
    const double lo = std::max(spec.min[a], c - half_width);
    const double hi = std::min(spec.max[a], c + half_width);
    out.len = 0;
    if (!(hi > lo)) return;
    const int klo = cell_of(spec, axis, lo);
    const int khi = cell_of(spec, axis, hi);
    const bool cubic = use_cubic(kind, n);
    if (cubic) {
        out.j0 = std::clamp(klo - 1, 0, n - 4);
        out.len = std::clamp(khi - 1, 0, n - 4) + 4 - out.j0;
    } else {
        out.j0 = klo;
        out.len = khi + 2 - klo;
    }
    for (int q = 0; q <= qmax; ++q) out.g[static_cast<std::size_t>(q)].assign(static_cast<std::size_t>(out.len), 0.0);
    const std::size_t R = cr.off.size();
    // Along the cells exp(-u^2 inv4) advances by ratios q_k with q_{k+1} = q_k exp(-2 inv4 h^2).
    const double z0 = c - spec.coord(axis, klo);
    const bool recur = 2.0 * std::abs(inv4) * h * (half_width + 2.0 * h) < 200.0;
    const cplx step = std::exp(-2.0 * inv4 * h * h);
    for (std::size_t r = 0; r < R; ++r) {
        double u = z0 - cr.off[r];
        cplx e = std::exp(-u * u * inv4);
        cplx ratio = recur ? std::exp(inv4 * (2.0 * h * u - h * h)) : cplx(0.0);
        for (int k = klo; k <= khi; ++k) {
            if (!recur && k > klo) e = std::exp(-u * u * inv4);
            const int first = cubic ? std::clamp(k - 1, 0, n - 4) : k;
            const std::size_t pattern = !cubic ? 1 : (k == 0 ? 0 : (k == n - 2 ? 2 : 1));
            const std::array<double, 4>& sw = cr.sw[pattern][r];
            const cplx base = e * cr.w[r];
            for (int l = 0; l < cr.len; ++l) {
                const auto idx = static_cast<std::size_t>(first + l - out.j0);
                const cplx b = base * sw[static_cast<std::size_t>(l)];
                out.g[0][idx] += b;
                if (qmax >= 1) out.g[1][idx] += b * u;
                if (qmax >= 2) out.g[2][idx] += b * (u * u);
            }
            u -= h;
            if (recur) {
                e *= ratio;
                ratio *= step;
            }
        }
    }
}

// Panel width resolving both the modulus and the phase of exp(-u^2 inv4).
double kernel_panel(cplx inv4, double fraction) {
    const double sigma = 1.0 / std::sqrt(inv4.real());
    return fraction * sigma / std::sqrt(1.0 + std::pow(inv4.imag() / inv4.real(), 2));
}

// Combination of per-axis powers q_a for the derivative contractions.
using Combo = std::vector<int>;

std::vector<Combo> combos_for(int d, int deriv) {
    std::vector<Combo> out;
    out.push_back(Combo(static_cast<std::size_t>(d), 0));
    if (deriv >= 1) {
        for (int k = 0; k < d; ++k) {
            Combo c(static_cast<std::size_t>(d), 0);
            c[static_cast<std::size_t>(k)] = 1;
            out.push_back(c);
        }
    }
    if (deriv >= 2) {
        for (int k = 0; k < d; ++k)
            for (int l = k; l < d; ++l) {
                Combo c(static_cast<std::size_t>(d), 0);
                c[static_cast<std::size_t>(k)] += 1;
                c[static_cast<std::size_t>(l)] += 1;
                out.push_back(c);
            }
    }
    return out;
}

int combo_index(int d, int deriv, int k, int l) {
    // 0: value; 1..d: first powers; then pairs (k <= l).
    (void)deriv;
    if (k < 0) return 0;
    if (l < 0) return 1 + k;
    if (k > l) std::swap(k, l);
    int idx = 1 + d;
    for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b) {
            if (a == k && b == l) return idx;
            ++idx;
        }
    return -1;
}

void assemble_point(const OUSystem& sys, const KernelEvaluator& ev, int deriv,
                    const std::vector<std::vector<cplx>>& C,  // [combo][m]
                    PointValues& out, std::size_t p) {
    const int d = sys.d;
    const int n = sys.N;
    const MatrixXr& R = ev.rotation();
    const VectorXc& pref = ev.prefactor();
    const VectorXc& inv2 = ev.inv_2t_lambda();
    VectorXc u(n);
    for (int m = 0; m < n; ++m) u(m) = pref(m) * C[0][static_cast<std::size_t>(m)];
    out.value[p] = sys.Y * u;
    if (deriv >= 1) {
        out.grad[p].assign(static_cast<std::size_t>(d), VectorXc());
        for (int i = 0; i < d; ++i) {
            for (int m = 0; m < n; ++m) {
                cplx s = 0.0;
                for (int k = 0; k < d; ++k) s += R(k, i) * C[static_cast<std::size_t>(combo_index(d, deriv, k, -1))][static_cast<std::size_t>(m)];
                u(m) = -inv2(m) * pref(m) * s;
            }
            out.grad[p][static_cast<std::size_t>(i)] = sys.Y * u;
        }
    }
    if (deriv >= 2) {
        out.hess[p].assign(static_cast<std::size_t>(d), std::vector<VectorXc>(static_cast<std::size_t>(d)));
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                for (int m = 0; m < n; ++m) {
                    cplx s = 0.0;
                    for (int k = 0; k < d; ++k)
                        for (int l = 0; l < d; ++l)
                            s += R(k, i) * R(l, j) * C[static_cast<std::size_t>(combo_index(d, deriv, k, l))][static_cast<std::size_t>(m)];
                    cplx val = inv2(m) * inv2(m) * s;
                    if (i == j) val -= inv2(m) * C[0][static_cast<std::size_t>(m)];
                    u(m) = pref(m) * val;
                }
                out.hess[p][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = sys.Y * u;
            }
    }
}

void init_output(PointValues& out, std::size_t count, int deriv) {
    out.value.assign(count, VectorXc());
    if (deriv >= 1) out.grad.assign(count, {});
    if (deriv >= 2) out.hess.assign(count, {});
}

}  // namespace

VectorXc interpolate(const GridFunction& v, const VectorXr& x, Interpolation kind) {
    const GridSpec& spec = v.spec;
    const int d = spec.dim();
    if (x.size() != d) raise(ErrorCode::InvalidInput, "point dimension mismatch");
    std::vector<Stencil> st(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
        const auto aa = static_cast<std::size_t>(a);
        if (x(a) < spec.min[aa] || x(a) > spec.max[aa]) return VectorXc::Zero(v.N);
        st[aa] = cell_stencil(spec, a, cell_of(spec, a, x(a)), x(a), kind);
    }
    VectorXc out = VectorXc::Zero(v.N);
    std::vector<int> l(static_cast<std::size_t>(d), 0), idx(static_cast<std::size_t>(d));
    while (true) {
        double w = 1.0;
        for (int a = 0; a < d; ++a) {
            const auto aa = static_cast<std::size_t>(a);
            idx[aa] = st[aa].first + l[aa];
            w *= st[aa].w[static_cast<std::size_t>(l[aa])];
        }
        const std::size_t node = spec.flat_index(idx);
        for (int k = 0; k < v.N; ++k) out(k) += w * v.values[node * static_cast<std::size_t>(v.N) + static_cast<std::size_t>(k)];
        int a = 0;
        while (a < d) {
            const auto aa = static_cast<std::size_t>(a);
            if (++l[aa] < st[aa].len) break;
            l[aa] = 0;
            ++a;
        }
        if (a == d) break;
    }
    return out;
}

Field constant_field(const VectorXc& c, int d) {
    Field f;
    f.N = static_cast<int>(c.size());
    f.f = [c](const VectorXr&) { return c; };
    f.scale = std::numeric_limits<double>::infinity();
    (void)d;
    return f;
}

Field gaussian_field(const VectorXc& c, const VectorXr& center, double width) {
    if (!(width > 0.0)) raise(ErrorCode::InvalidInput, "width must be positive");
    Field f;
    f.N = static_cast<int>(c.size());
    f.f = [c, center, width](const VectorXr& x) {
        return VectorXc(c * std::exp(-(x - center).squaredNorm() / (width * width)));
    };
    const double r = width * std::sqrt(std::log(1e17));
    f.support_lo = center.array() - r;
    f.support_hi = center.array() + r;
    f.scale = width;
    return f;
}

GridPropagator::GridPropagator(const OUSystem& sys, const GridFunction& v, const SemigroupOptions& opt)
    : sys_(&sys), spec_(v.spec), opt_(opt) {
    spec_.validate();
    if (spec_.dim() != sys.d) raise(ErrorCode::InvalidInput, "grid dimension differs from the system dimension");
    if (v.N != sys.N) raise(ErrorCode::InvalidInput, "grid function size differs from the system size");
    if (v.values.size() != spec_.nodes() * static_cast<std::size_t>(v.N))
        raise(ErrorCode::InvalidInput, "value count does not match the grid");
    const std::size_t nodes = spec_.nodes();
    coeff_.assign(static_cast<std::size_t>(sys.N), std::vector<cplx>(nodes, 0.0));
    double vmax = 0.0, face = 0.0;
    for (std::size_t node = 0; node < nodes; ++node) {
        const VectorXc w = sys.Yinv * v.at(node);
        for (int m = 0; m < sys.N; ++m) coeff_[static_cast<std::size_t>(m)][node] = w(m);
        const double a = v.at(node).norm();
        vmax = std::max(vmax, a);
        const std::vector<int> idx = spec_.multi_index(node);
        for (int k = 0; k < spec_.dim(); ++k)
            if (idx[static_cast<std::size_t>(k)] == 0 || idx[static_cast<std::size_t>(k)] == spec_.count[static_cast<std::size_t>(k)] - 1)
                face = std::max(face, a);
    }
    tail_warning_ = vmax > 0.0 && face > 1e-6 * vmax;
}

PointValues GridPropagator::semigroup(double t, const std::vector<VectorXr>& points, int deriv) const {
    return evaluate(t, points, deriv, false);
}

std::vector<VectorXc> GridPropagator::diffusion(double t, const std::vector<VectorXr>& points) const {
    return evaluate(t, points, 0, true).value;
}

PointValues GridPropagator::evaluate(double t, const std::vector<VectorXr>& points, int deriv, bool diffusion) const {
    if (deriv < 0 || deriv > 2) raise(ErrorCode::InvalidInput, "derivative order must be 0, 1 or 2");
    const OUSystem& sys = *sys_;
    const KernelEvaluator ev(sys, t);
    const int d = sys.d;
    const int n = sys.N;
    const double rho = std::sqrt(std::log(1.0 / opt_.kernel_tol)) + 0.5;
    std::vector<double> half(static_cast<std::size_t>(n));
    std::vector<std::vector<CellRule>> rules(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m) {
        const cplx inv4 = ev.inv_4t_lambda()(m);
        half[static_cast<std::size_t>(m)] = rho / std::sqrt(inv4.real());
        const double panel = kernel_panel(inv4, opt_.panel_fraction);
        for (int a = 0; a < d; ++a)
            rules[static_cast<std::size_t>(m)].push_back(make_cell_rule(spec_, a, panel, opt_.order, opt_.interpolation));
    }
    const std::vector<Combo> combos = combos_for(d, deriv);
    const int qmax = deriv;
    PointValues out;
    init_output(out, points.size(), deriv);
    const MatrixXr Rt = ev.rotation().transpose();
    std::vector<VectorXr> cs(points.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
        if (points[p].size() != d) raise(ErrorCode::InvalidInput, "point dimension mismatch");
        cs[p] = diffusion ? VectorXr(ev.rotation() * (Rt * points[p])) : VectorXr(ev.rotation() * points[p]);
    }

    // Points sharing their first rotated coordinate share the axis-0 contraction of every grid row.
    const int n0 = spec_.count[0];
    const std::size_t rows_total = spec_.nodes() / static_cast<std::size_t>(n0);
    std::vector<double> keys;
    for (const VectorXr& c : cs) keys.push_back(c(0));
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    const bool row_mode = d > 1 && keys.size() * 4 <= points.size();
    struct RowEntry {
        AxisTable tab;
        std::array<std::vector<cplx>, 3> rows;
    };
    std::vector<std::vector<RowEntry>> row_cache;
    if (row_mode) {
        row_cache.assign(static_cast<std::size_t>(n), std::vector<RowEntry>(keys.size()));
        parallel_for(keys.size(), [&](std::size_t begin, std::size_t end) {
            for (std::size_t k = begin; k < end; ++k)
                for (int m = 0; m < n; ++m) {
                    const auto mm = static_cast<std::size_t>(m);
                    RowEntry& e = row_cache[mm][k];
                    build_axis_table(spec_, 0, keys[k], ev.inv_4t_lambda()(m), half[mm], rules[mm][0], qmax,
                                     opt_.interpolation, e.tab);
                    const std::vector<cplx>& coeff = coeff_[mm];
                    for (int q = 0; q <= qmax; ++q) {
                        std::vector<cplx>& rows = e.rows[static_cast<std::size_t>(q)];
                        rows.assign(rows_total, 0.0);
                        const std::vector<cplx>& g = e.tab.g[static_cast<std::size_t>(q)];
                        for (std::size_t r = 0; r < rows_total; ++r) {
                            const std::size_t base = static_cast<std::size_t>(e.tab.j0) + r * static_cast<std::size_t>(n0);
                            cplx acc = 0.0;
                            for (int j = 0; j < e.tab.len; ++j) acc += g[static_cast<std::size_t>(j)] * coeff[base + static_cast<std::size_t>(j)];
                            rows[r] = acc;
                        }
                    }
                }
        });
    }

    parallel_for(points.size(), [&](std::size_t begin, std::size_t end) {
        std::vector<std::vector<AxisTable>> tables(static_cast<std::size_t>(n), std::vector<AxisTable>(static_cast<std::size_t>(d)));
        std::vector<std::vector<cplx>> C(combos.size(), std::vector<cplx>(static_cast<std::size_t>(n)));
        std::vector<std::vector<cplx>> inner(static_cast<std::size_t>(qmax + 1));
        std::vector<cplx> cur, nxt;
        std::vector<int> idx(static_cast<std::size_t>(d), 0);
        // Tables depend on (m, axis, coordinate) only; without rotation the coordinates repeat.
        std::vector<std::unordered_map<double, AxisTable>> caches(static_cast<std::size_t>(n * d));
        for (std::size_t p = begin; p < end; ++p) {
            const VectorXr& c = cs[p];
            const std::size_t key = row_mode ? static_cast<std::size_t>(std::lower_bound(keys.begin(), keys.end(), c(0)) - keys.begin()) : 0;
            for (int m = 0; m < n; ++m) {
                const auto mm = static_cast<std::size_t>(m);
                bool empty = false;
                std::vector<const AxisTable*> tb(static_cast<std::size_t>(d));
                for (int a = 0; a < d; ++a) {
                    const auto aa = static_cast<std::size_t>(a);
                    if (a == 0 && row_mode) {
                        tb[0] = &row_cache[mm][key].tab;
                    } else {
                        auto& cache = caches[mm * static_cast<std::size_t>(d) + aa];
                        auto it = cache.find(c(a));
                        if (it == cache.end()) {
                            AxisTable& fresh = tables[mm][aa];
                            build_axis_table(spec_, a, c(a), ev.inv_4t_lambda()(m), half[mm], rules[mm][aa], qmax,
                                             opt_.interpolation, fresh);
                            if (cache.size() < 4096) it = cache.emplace(c(a), fresh).first;
                        }
                        tb[aa] = it != cache.end() ? &it->second : &tables[mm][aa];
                    }
                    empty = empty || tb[aa]->len == 0;
                }
                if (empty) {
                    for (auto& cc : C) cc[mm] = 0.0;
                    continue;
                }
                // Axis-0 contraction for each row inside the windows of axes 1..d-1.
                std::size_t outer = 1;
                for (int a = 1; a < d; ++a) outer *= static_cast<std::size_t>(tb[static_cast<std::size_t>(a)]->len);
                for (auto& in : inner) in.resize(outer);
                const std::vector<cplx>& coeff = coeff_[mm];
                for (int a = 1; a < d; ++a) idx[static_cast<std::size_t>(a)] = tb[static_cast<std::size_t>(a)]->j0;
                idx[0] = tb[0]->j0;
                for (std::size_t o = 0; o < outer; ++o) {
                    const std::size_t base = spec_.flat_index(idx);
                    for (int q = 0; q <= qmax; ++q) {
                        const auto qq = static_cast<std::size_t>(q);
                        if (row_mode) {
                            inner[qq][o] = row_cache[mm][key].rows[qq][base / static_cast<std::size_t>(n0)];
                        } else {
                            const std::vector<cplx>& g = tb[0]->g[qq];
                            cplx acc = 0.0;
                            for (int j = 0; j < tb[0]->len; ++j) acc += g[static_cast<std::size_t>(j)] * coeff[base + static_cast<std::size_t>(j)];
                            inner[qq][o] = acc;
                        }
                    }
                    for (int a = 1; a < d; ++a) {
                        const auto aa = static_cast<std::size_t>(a);
                        if (++idx[aa] < tb[aa]->j0 + tb[aa]->len) break;
                        idx[aa] = tb[aa]->j0;
                    }
                }
                // Remaining axes reduced in order 1..d-1.
                for (std::size_t ci = 0; ci < combos.size(); ++ci) {
                    const Combo& cb = combos[ci];
                    if (cb[0] > qmax) {
                        C[ci][mm] = 0.0;
                        continue;
                    }
                    cur = inner[static_cast<std::size_t>(cb[0])];
                    for (int a = 1; a < d; ++a) {
                        const auto aa = static_cast<std::size_t>(a);
                        const std::size_t len = static_cast<std::size_t>(tb[aa]->len);
                        const std::vector<cplx>& g = tb[aa]->g[static_cast<std::size_t>(cb[aa])];
                        nxt.assign(cur.size() / len, 0.0);
                        for (std::size_t r = 0; r < nxt.size(); ++r) {
                            cplx acc = 0.0;
                            for (std::size_t j = 0; j < len; ++j) acc += g[j] * cur[j + len * r];
                            nxt[r] = acc;
                        }
                        cur.swap(nxt);
                    }
                    C[ci][mm] = cur[0];
                }
            }
            assemble_point(sys, ev, deriv, C, out, p);
        }
    });
    return out;
}

FieldPropagator::FieldPropagator(const OUSystem& sys, Field g, const SemigroupOptions& opt)
    : sys_(&sys), g_(std::move(g)), opt_(opt) {
    if (!g_.f) raise(ErrorCode::InvalidInput, "field needs a callable");
    if (g_.N != sys.N) raise(ErrorCode::InvalidInput, "field size differs from the system size");
    if (g_.support_lo.size() != 0 && (g_.support_lo.size() != sys.d || g_.support_hi.size() != sys.d))
        raise(ErrorCode::InvalidInput, "support box dimension mismatch");
}

PointValues FieldPropagator::semigroup(double t, const std::vector<VectorXr>& points, int deriv) const {
    if (deriv < 0 || deriv > 2) raise(ErrorCode::InvalidInput, "derivative order must be 0, 1 or 2");
    const OUSystem& sys = *sys_;
    const KernelEvaluator ev(sys, t);
    const int d = sys.d;
    const int n = sys.N;
    const double rho = std::sqrt(std::log(1.0 / opt_.kernel_tol)) + 0.5;
    const double sigma = ev.sigma();
    double panel = std::numeric_limits<double>::infinity();
    for (int m = 0; m < n; ++m) panel = std::min(panel, kernel_panel(ev.inv_4t_lambda()(m), opt_.field_panel_fraction));
    panel = std::min(panel, opt_.field_panel_fraction * g_.scale);

    // Route choice: kernel box around each point or the support box of g.
    const bool has_support = g_.support_lo.size() == d;
    double psi_nodes = 1.0, xi_nodes = 1.0;
    for (int a = 0; a < d; ++a) {
        psi_nodes *= std::ceil(2.0 * rho * sigma / panel);
        if (has_support) xi_nodes *= std::ceil((g_.support_hi(a) - g_.support_lo(a)) / panel);
    }
    const bool xi_route = has_support && xi_nodes < psi_nodes;

    std::vector<Rule1D> rules;
    for (int a = 0; a < d; ++a) {
        const double lo = xi_route ? g_.support_lo(a) : -rho * sigma;
        const double hi = xi_route ? g_.support_hi(a) : rho * sigma;
        const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / panel)));
        rules.push_back(composite_gauss_legendre(lo, hi, panels, opt_.order));
    }
    std::size_t total = 1;
    for (const Rule1D& r : rules) total *= r.size();

    // Node coordinates and weights in axis-0-fastest order.
    auto node_of = [&](std::size_t k, VectorXr& y) {
        double w = 1.0;
        for (int a = 0; a < d; ++a) {
            const Rule1D& r = rules[static_cast<std::size_t>(a)];
            const std::size_t j = k % r.size();
            k /= r.size();
            y(a) = r.x[j];
            w *= r.w[j];
        }
        return w;
    };

    // In the support route the field values are shared by all points.
    std::vector<VectorXc> gvals;
    if (xi_route) {
        gvals.resize(total);
        parallel_for(total, [&](std::size_t begin, std::size_t end) {
            VectorXr y(d);
            for (std::size_t k = begin; k < end; ++k) {
                node_of(k, y);
                gvals[k] = sys.Yinv * g_.f(y);
            }
        });
    }

    PointValues out;
    init_output(out, points.size(), deriv);
    const VectorXc& inv2 = ev.inv_2t_lambda();
    const VectorXc& inv4 = ev.inv_4t_lambda();
    const VectorXc pref = ev.diagonal(0.0);
    const MatrixXr& R = ev.rotation();

    // Separable factors w_j exp(-psi_j^2 inv4_m) per axis, flattened as [m][j].
    auto axis_factors = [&](int a, double shift, std::vector<cplx>& e) {
        const Rule1D& r = rules[static_cast<std::size_t>(a)];
        e.resize(static_cast<std::size_t>(n) * r.size());
        for (int m = 0; m < n; ++m)
            for (std::size_t j = 0; j < r.size(); ++j) {
                const double u = xi_route ? shift - r.x[j] : r.x[j];
                e[static_cast<std::size_t>(m) * r.size() + j] = r.w[j] * std::exp(-u * u * inv4(m));
            }
    };
    std::vector<std::vector<cplx>> shared(static_cast<std::size_t>(d));
    if (!xi_route)
        for (int a = 0; a < d; ++a) axis_factors(a, 0.0, shared[static_cast<std::size_t>(a)]);

    parallel_for(points.size(), [&](std::size_t begin, std::size_t end) {
        VectorXr y(d), psi(d), pr(d);
        VectorXc u(n), base(n);
        std::vector<std::vector<cplx>> local(static_cast<std::size_t>(d));
        std::vector<std::size_t> idx(static_cast<std::size_t>(d));
        std::vector<VectorXc> acc1(static_cast<std::size_t>(d));
        std::vector<std::vector<VectorXc>> acc2(static_cast<std::size_t>(d), std::vector<VectorXc>(static_cast<std::size_t>(d)));
        for (std::size_t p = begin; p < end; ++p) {
            const VectorXr c = R * points[p];
            if (xi_route)
                for (int a = 0; a < d; ++a) axis_factors(a, c(a), local[static_cast<std::size_t>(a)]);
            const std::vector<std::vector<cplx>>& fac = xi_route ? local : shared;
            VectorXc acc0 = VectorXc::Zero(n);
            for (int i = 0; i < d; ++i) {
                acc1[static_cast<std::size_t>(i)] = VectorXc::Zero(n);
                for (int j = 0; j < d; ++j) acc2[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = VectorXc::Zero(n);
            }
            std::fill(idx.begin(), idx.end(), 0);
            for (std::size_t k = 0; k < total; ++k) {
                for (int a = 0; a < d; ++a) y(a) = rules[static_cast<std::size_t>(a)].x[idx[static_cast<std::size_t>(a)]];
                if (xi_route) {
                    u = gvals[k];
                } else {
                    u = sys.Yinv * g_.f(c - y);
                }
                for (int m = 0; m < n; ++m) {
                    cplx kw = pref(m);
                    for (int a = 0; a < d; ++a) {
                        const auto aa = static_cast<std::size_t>(a);
                        kw *= fac[aa][static_cast<std::size_t>(m) * rules[aa].size() + idx[aa]];
                    }
                    base(m) = kw * u(m);
                }
                acc0 += base;
                if (deriv >= 1) {
                    psi = xi_route ? VectorXr(c - y) : y;
                    pr = R.transpose() * psi;  // <psi, e^{tS} e_i>
                    for (int i = 0; i < d; ++i)
                        for (int m = 0; m < n; ++m) acc1[static_cast<std::size_t>(i)](m) -= inv2(m) * pr(i) * base(m);
                    if (deriv >= 2) {
                        for (int i = 0; i < d; ++i)
                            for (int j = 0; j < d; ++j)
                                for (int m = 0; m < n; ++m) {
                                    cplx f = inv2(m) * inv2(m) * pr(i) * pr(j);
                                    if (i == j) f -= inv2(m);
                                    acc2[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)](m) += f * base(m);
                                }
                    }
                }
                for (int a = 0; a < d; ++a) {
                    const auto aa = static_cast<std::size_t>(a);
                    if (++idx[aa] < rules[aa].size()) break;
                    idx[aa] = 0;
                }
            }
            out.value[p] = sys.Y * acc0;
            if (deriv >= 1) {
                out.grad[p].resize(static_cast<std::size_t>(d));
                for (int i = 0; i < d; ++i) out.grad[p][static_cast<std::size_t>(i)] = sys.Y * acc1[static_cast<std::size_t>(i)];
            }
            if (deriv >= 2) {
                out.hess[p].assign(static_cast<std::size_t>(d), std::vector<VectorXc>(static_cast<std::size_t>(d)));
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j)
                        out.hess[p][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = sys.Y * acc2[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            }
        }
    });
    return out;
}

}  // namespace oukit
