#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <vector>

namespace oukit {

struct Rule1D {
    std::vector<double> x;
    std::vector<double> w;
    std::size_t size() const { return x.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1]; cached, thread-safe.
const Rule1D& gauss_legendre(int n);

/// Gauss-Legendre rule of the given order on each interval [breaks[k], breaks[k+1]].
Rule1D composite_gauss_legendre(const std::vector<double>& breaks, int order);
Rule1D composite_gauss_legendre(double a, double b, int panels, int order);

/// Breakpoints 0, h, 2h, 4h, ... up to and including b.
std::vector<double> geometric_breaks(double first, double b);

template <class T>
struct AdaptiveResult {
    T value;
    double est_error = 0.0;
    int intervals = 0;
    bool converged = true;
};

namespace detail {
inline constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                   0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                   0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                   0.207784955007898467600689403773245, 0.0};
inline constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                   0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                   0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                   0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                  0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
double magnitude(const T& v) {
    if constexpr (std::is_arithmetic_v<T>) {
        return std::abs(v);
    } else if constexpr (requires { v.norm(); }) {
        return v.norm();
    } else {
        return std::abs(v);
    }
}

template <class F, class T>
void gk15(F& f, double a, double b, T& result, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    T fc = f(c);
    T rk = fc * kWgk[7];
    T rg = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        T f1 = f(c - dx);
        T f2 = f(c + dx);
        rk = rk + (f1 + f2) * kWgk[j];
        if (j % 2 == 1) rg = rg + (f1 + f2) * kWg[j / 2];
    }
    result = rk * h;
    err = magnitude(T((rk - rg) * h));
}
}  // namespace detail

/// Globally adaptive Gauss-Kronrod 7/15 integration of a scalar, complex or Eigen-valued integrand,
/// starting from the intervals given by the sorted breakpoints.
template <class F>
auto integrate_adaptive(F f, const std::vector<double>& breaks, double abs_tol, double rel_tol,
                        int max_intervals = 4000) -> AdaptiveResult<std::decay_t<decltype(f(breaks[0]))>> {
    using T = std::decay_t<decltype(f(breaks[0]))>;
    struct Piece {
        double a, b, err;
        T val;
        bool operator<(const Piece& o) const { return err < o.err; }
    };
    std::priority_queue<Piece> heap;
    T total{};
    double total_err = 0.0;
    int count = 0;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        Piece p{breaks[k], breaks[k + 1], 0.0, T{}};
        detail::gk15(f, p.a, p.b, p.val, p.err);
        total = count == 0 ? p.val : T(total + p.val);
        total_err += p.err;
        heap.push(p);
        ++count;
    }
    while (total_err > std::max(abs_tol, rel_tol * detail::magnitude(total)) && count < max_intervals) {
        Piece p = heap.top();
        heap.pop();
        const double m = 0.5 * (p.a + p.b);
        Piece l{p.a, m, 0.0, T{}}, r{m, p.b, 0.0, T{}};
        detail::gk15(f, l.a, l.b, l.val, l.err);
        detail::gk15(f, r.a, r.b, r.val, r.err);
        total = total - p.val + l.val + r.val;
        total_err += l.err + r.err - p.err;
        heap.push(l);
        heap.push(r);
        ++count;
    }
    // Recompute the sum in a fixed order for a stable result.
    std::vector<Piece> pieces;
    pieces.reserve(heap.size());
    while (!heap.empty()) {
        pieces.push_back(heap.top());
        heap.pop();
    }
    std::sort(pieces.begin(), pieces.end(), [](const Piece& x, const Piece& y) { return x.a < y.a; });
    T sum = pieces.front().val;
    double err = pieces.front().err;
    for (std::size_t k = 1; k < pieces.size(); ++k) {
        sum = sum + pieces[k].val;
        err += pieces[k].err;
    }
    AdaptiveResult<T> res{sum, err, count, err <= std::max(abs_tol, rel_tol * detail::magnitude(sum))};
    return res;
}

template <class F>
auto integrate_adaptive(F f, double a, double b, double abs_tol, double rel_tol, int max_intervals = 4000) {
    return integrate_adaptive(f, std::vector<double>{a, b}, abs_tol, rel_tol, max_intervals);
}

/// Adaptive integration over [a, inf) through t = a + u/(1-u).
template <class F>
auto integrate_semi_infinite(F f, double a, double abs_tol, double rel_tol, int max_intervals = 4000) {
    auto g = [&](double u) {
        const double one_minus = 1.0 - u;
        const double t = a + u / one_minus;
        return f(t) * (1.0 / (one_minus * one_minus));
    };
    return integrate_adaptive(g, 0.0, 1.0, abs_tol, rel_tol, max_intervals);
}

}  // namespace oukit
