#include "oukit/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "oukit/errors.hpp"

namespace oukit {

namespace {

Rule1D compute_gauss_legendre(int n) {
    Rule1D r;
    r.x.resize(static_cast<std::size_t>(n));
    r.w.resize(static_cast<std::size_t>(n));
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p1 = z;
                p0 = 1.0;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        r.x[static_cast<std::size_t>(i)] = -z;
        r.x[static_cast<std::size_t>(n - 1 - i)] = z;
        r.w[static_cast<std::size_t>(i)] = w;
        r.w[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    if (n % 2 == 1) r.x[static_cast<std::size_t>(n / 2)] = 0.0;
    return r;
}

}  // namespace

const Rule1D& gauss_legendre(int n) {
    if (n < 1) raise(ErrorCode::InvalidInput, "Gauss-Legendre order must be positive");
    static std::mutex mtx;
    static std::map<int, Rule1D> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) {
        if (n == 1) {
            it = cache.emplace(n, Rule1D{{0.0}, {2.0}}).first;
        } else {
            it = cache.emplace(n, compute_gauss_legendre(n)).first;
        }
    }
    return it->second;
}

Rule1D composite_gauss_legendre(const std::vector<double>& breaks, int order) {
    const Rule1D& g = gauss_legendre(order);
    Rule1D r;
    if (breaks.size() < 2) return r;
    r.x.reserve((breaks.size() - 1) * g.size());
    r.w.reserve((breaks.size() - 1) * g.size());
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const double a = breaks[k], b = breaks[k + 1];
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        for (std::size_t i = 0; i < g.size(); ++i) {
            r.x.push_back(c + h * g.x[i]);
            r.w.push_back(h * g.w[i]);
        }
    }
    return r;
}

Rule1D composite_gauss_legendre(double a, double b, int panels, int order) {
    std::vector<double> br(static_cast<std::size_t>(panels) + 1);
    for (int k = 0; k <= panels; ++k) br[static_cast<std::size_t>(k)] = a + (b - a) * k / panels;
    br.back() = b;
    return composite_gauss_legendre(br, order);
}

std::vector<double> geometric_breaks(double first, double b) {
    std::vector<double> br{0.0};
    double x = first;
    while (x < b) {
        br.push_back(x);
        x *= 2.0;
    }
    br.push_back(b);
    return br;
}

}  // namespace oukit
