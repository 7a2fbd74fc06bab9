#include "oukit/weights.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "oukit/errors.hpp"

namespace oukit {

namespace {

double log_cosh(double u) {
    const double a = std::abs(u);
    return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

VectorXr random_point(std::mt19937_64& rng, int dim, double radius) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    VectorXr x(dim);
    for (int k = 0; k < dim; ++k) x(k) = g(rng);
    const double n = x.norm();
    if (n == 0.0) return x;
    return x * (radius * std::pow(u(rng), 1.0 / dim) / n);
}

}  // namespace

const char* to_string(WeightKind kind) noexcept {
    switch (kind) {
        case WeightKind::exp_abs: return "exp_abs";
        case WeightKind::cosh_abs: return "cosh_abs";
        case WeightKind::exp_smooth: return "exp_smooth";
        case WeightKind::cosh_smooth: return "cosh_smooth";
        case WeightKind::unit: return "unit";
        case WeightKind::custom: return "custom";
    }
    return "unknown";
}

WeightKind weight_kind_from_string(const std::string& name) {
    for (WeightKind k : {WeightKind::exp_abs, WeightKind::cosh_abs, WeightKind::exp_smooth, WeightKind::cosh_smooth,
                         WeightKind::unit}) {
        if (name == to_string(k)) return k;
    }
    raise(ErrorCode::InvalidInput, "unknown weight kind '" + name + "'");
}

WeightFunction make_weight(WeightKind kind, double mu) {
    if (kind == WeightKind::custom) raise(ErrorCode::InvalidInput, "use custom_weight for custom weights");
    if (!std::isfinite(mu)) raise(ErrorCode::InvalidInput, "weight parameter must be finite");
    WeightFunction w;
    w.kind = kind;
    w.mu = kind == WeightKind::unit ? 0.0 : mu;
    w.eta = std::abs(w.mu);
    w.C_theta = 1.0;
    return w;
}

WeightFunction unit_weight() { return make_weight(WeightKind::unit); }

WeightFunction custom_weight(std::function<double(const VectorXr&)> f, double eta, double C_theta) {
    if (!f) raise(ErrorCode::InvalidInput, "custom weight needs a callable");
    if (!(eta >= 0.0) || !(C_theta >= 1.0)) raise(ErrorCode::InvalidInput, "custom weight needs eta >= 0, C_theta >= 1");
    WeightFunction w;
    w.kind = WeightKind::custom;
    w.eta = eta;
    w.C_theta = C_theta;
    w.custom = std::move(f);
    return w;
}

bool is_radial(const WeightFunction& w) { return w.kind != WeightKind::custom; }

double eval_weight_radial(const WeightFunction& w, double r) {
    switch (w.kind) {
        case WeightKind::exp_abs: return std::exp(-w.mu * r);
        case WeightKind::cosh_abs: return std::cosh(w.mu * r);
        case WeightKind::exp_smooth: return std::exp(-w.mu * std::sqrt(r * r + 1.0));
        case WeightKind::cosh_smooth: return std::cosh(w.mu * std::sqrt(r * r + 1.0));
        case WeightKind::unit: return 1.0;
        case WeightKind::custom: break;
    }
    raise(ErrorCode::InvalidInput, "custom weights are not radial");
}

double eval_weight(const WeightFunction& w, const VectorXr& x) {
    if (w.kind == WeightKind::custom) return w.custom(x);
    return eval_weight_radial(w, x.norm());
}

double log_weight(const WeightFunction& w, const VectorXr& x) {
    const double r = x.norm();
    switch (w.kind) {
        case WeightKind::exp_abs: return -w.mu * r;
        case WeightKind::cosh_abs: return log_cosh(w.mu * r);
        case WeightKind::exp_smooth: return -w.mu * std::sqrt(r * r + 1.0);
        case WeightKind::cosh_smooth: return log_cosh(w.mu * std::sqrt(r * r + 1.0));
        case WeightKind::unit: return 0.0;
        case WeightKind::custom: return std::log(w.custom(x));
    }
    return 0.0;
}

LowerEnvelope lower_envelope(const WeightFunction& w, int dim) {
    switch (w.kind) {
        case WeightKind::exp_abs: return {1.0, -w.mu};
        case WeightKind::cosh_abs:
        case WeightKind::cosh_smooth: return {0.5, std::abs(w.mu)};
        case WeightKind::exp_smooth: return {std::exp(-std::max(w.mu, 0.0)), -w.mu};
        case WeightKind::unit: return {1.0, 0.0};
        case WeightKind::custom: break;
    }
    // theta(0) <= C_theta theta(y) e^{eta |y|} by the growth envelope.
    return {w.custom(VectorXr::Zero(dim)) / w.C_theta, -w.eta};
}

EnvelopeCheck check_growth_envelope(const WeightFunction& w, int sample_count, const AxiomSampling& s) {
    if (sample_count < 1) raise(ErrorCode::InvalidInput, "sample_count must be >= 1");
    std::mt19937_64 rng(s.seed);
    double best = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < sample_count; ++k) {
        const VectorXr x = random_point(rng, s.dim, s.radius);
        const VectorXr y = random_point(rng, s.dim, s.radius);
        best = std::max(best, log_weight(w, x + y) - log_weight(w, x) - w.eta * y.norm());
    }
    EnvelopeCheck c;
    c.C_observed = std::exp(best);
    c.max_violation = std::max(0.0, c.C_observed / w.C_theta - 1.0);
    return c;
}

TranslationCheck check_translation_regularity(const WeightFunction& w, const std::vector<VectorXr>& psi_sequence,
                                              int sample_count, const AxiomSampling& s) {
    TranslationCheck out;
    std::mt19937_64 rng(s.seed);
    std::vector<VectorXr> xs;
    for (int k = 0; k < sample_count; ++k) xs.push_back(random_point(rng, s.dim, s.radius));
    for (const VectorXr& psi : psi_sequence) {
        if (psi.size() != s.dim) raise(ErrorCode::InvalidInput, "shift dimension mismatch");
        double sup = 0.0;
        for (const VectorXr& x : xs) sup = std::max(sup, std::abs(std::expm1(log_weight(w, x + psi) - log_weight(w, x))));
        out.ratios.push_back(sup);
    }
    if ((w.kind == WeightKind::exp_smooth || w.kind == WeightKind::cosh_smooth) && w.mu != 0.0) {
        const double h = 1e-5;
        double worst = 0.0;
        for (const VectorXr& x : xs) {
            VectorXr grad(s.dim);
            for (int i = 0; i < s.dim; ++i) {
                VectorXr e = VectorXr::Zero(s.dim);
                e(i) = h;
                grad(i) = (log_weight(w, x + e) - log_weight(w, x - e)) / (2.0 * h);
            }
            worst = std::max(worst, grad.norm() / std::abs(w.mu));
        }
        out.gradient_ratio = worst;
    }
    return out;
}

double check_rotation_invariance(const WeightFunction& w, const MatrixXr& S, const std::vector<double>& t_samples,
                                 int x_samples, const AxiomSampling& s) {
    if ((S + S.transpose()).norm() > 1e-12 * std::max(1.0, S.norm())) raise(ErrorCode::NotSkew, "S must be skew");
    const RotationGenerator gen(S);
    std::mt19937_64 rng(s.seed);
    double worst = 0.0;
    for (int k = 0; k < x_samples; ++k) {
        const VectorXr x = random_point(rng, static_cast<int>(S.rows()), s.radius);
        const double base = eval_weight(w, x);
        for (double t : t_samples) worst = std::max(worst, std::abs(eval_weight(w, gen.at(t) * x) - base) / base);
    }
    return worst;
}

double GridSpec::h(int axis) const {
    const auto a = static_cast<std::size_t>(axis);
    return (max[a] - min[a]) / (count[a] - 1);
}

double GridSpec::coord(int axis, int i) const {
    const auto a = static_cast<std::size_t>(axis);
    if (i == count[a] - 1) return max[a];
    return min[a] + i * h(axis);
}

std::size_t GridSpec::nodes() const {
    if (count.empty()) return 0;
    std::size_t n = 1;
    for (int c : count) n *= static_cast<std::size_t>(std::max(c, 0));
    return n;
}

std::vector<int> GridSpec::multi_index(std::size_t index) const {
    std::vector<int> idx(count.size());
    for (std::size_t k = 0; k < count.size(); ++k) {
        idx[k] = static_cast<int>(index % static_cast<std::size_t>(count[k]));
        index /= static_cast<std::size_t>(count[k]);
    }
    return idx;
}

std::size_t GridSpec::flat_index(const std::vector<int>& idx) const {
    std::size_t flat = 0;
    for (std::size_t k = count.size(); k-- > 0;) flat = flat * static_cast<std::size_t>(count[k]) + static_cast<std::size_t>(idx[k]);
    return flat;
}

VectorXr GridSpec::node(std::size_t index) const {
    const std::vector<int> idx = multi_index(index);
    VectorXr x(dim());
    for (int k = 0; k < dim(); ++k) x(k) = coord(k, idx[static_cast<std::size_t>(k)]);
    return x;
}

void GridSpec::validate() const {
    if (count.empty()) raise(ErrorCode::EmptyGrid, "grid has no axes");
    if (min.size() != count.size() || max.size() != count.size())
        raise(ErrorCode::InvalidInput, "grid min/max/count lengths differ");
    for (std::size_t k = 0; k < count.size(); ++k) {
        if (count[k] < 2) raise(ErrorCode::EmptyGrid, "every grid axis needs at least 2 nodes");
        if (!(max[k] > min[k])) raise(ErrorCode::InvalidInput, "grid axis must have max > min");
    }
}

GridSpec cube_grid(int d, double lo, double hi, int n) {
    GridSpec g;
    g.min.assign(static_cast<std::size_t>(d), lo);
    g.max.assign(static_cast<std::size_t>(d), hi);
    g.count.assign(static_cast<std::size_t>(d), n);
    g.validate();
    return g;
}

GridSpec parse_grid_spec(const std::string& text) {
    GridSpec g;
    std::stringstream axes(text);
    std::string axis;
    while (std::getline(axes, axis, ',')) {
        std::stringstream parts(axis);
        std::string a, b, c;
        if (!std::getline(parts, a, ':') || !std::getline(parts, b, ':') || !std::getline(parts, c, ':'))
            raise(ErrorCode::ConfigInvalid, "grid axis '" + axis + "' is not min:max:count");
        try {
            std::size_t used = 0;
            g.min.push_back(std::stod(a));
            g.max.push_back(std::stod(b));
            g.count.push_back(std::stoi(c, &used));
            if (used != c.size()) throw std::invalid_argument("count");
        } catch (const std::exception&) {
            raise(ErrorCode::ConfigInvalid, "grid axis '" + axis + "' is not min:max:count");
        }
    }
    try {
        g.validate();
    } catch (const Error& e) {
        raise(ErrorCode::ConfigInvalid, e.what());
    }
    return g;
}

VectorXc GridFunction::at(std::size_t node) const {
    VectorXc v(N);
    for (int k = 0; k < N; ++k) v(k) = values[node * static_cast<std::size_t>(N) + static_cast<std::size_t>(k)];
    return v;
}

void GridFunction::set(std::size_t node, const VectorXc& v) {
    for (int k = 0; k < N; ++k) values[node * static_cast<std::size_t>(N) + static_cast<std::size_t>(k)] = v(k);
}

GridFunction sample(const GridSpec& spec, int N, const VectorField& f) {
    spec.validate();
    GridFunction g;
    g.spec = spec;
    g.N = N;
    g.values.assign(spec.nodes() * static_cast<std::size_t>(N), 0.0);
    for (std::size_t n = 0; n < spec.nodes(); ++n) {
        const VectorXc v = f(spec.node(n));
        if (v.size() != N) raise(ErrorCode::InvalidInput, "sampled function has the wrong size");
        g.set(n, v);
    }
    return g;
}

bool InteriorRange::contains(const std::vector<int>& idx) const {
    for (std::size_t k = 0; k < idx.size(); ++k)
        if (idx[k] < lo[k] || idx[k] > hi[k]) return false;
    return true;
}

InteriorRange interior_range(const GridSpec& spec, double boundary_fraction) {
    if (!(boundary_fraction >= 0.0 && boundary_fraction < 0.5))
        raise(ErrorCode::InvalidInput, "boundary fraction must lie in [0, 0.5)");
    InteriorRange r;
    for (int k = 0; k < spec.dim(); ++k) {
        const int n = spec.count[static_cast<std::size_t>(k)];
        const int skip = static_cast<int>(std::ceil(boundary_fraction * (n - 1) - 1e-9));
        r.lo.push_back(skip);
        r.hi.push_back(n - 1 - skip);
    }
    for (std::size_t k = 0; k < r.lo.size(); ++k)
        if (r.lo[k] >= r.hi[k]) raise(ErrorCode::EmptyGrid, "boundary layer leaves no interior");
    return r;
}

namespace {

struct Scan {
    double face_max = 0.0;
    double grid_max = 0.0;
};

template <class F>
Scan scan_nodes(const GridFunction& v, const WeightFunction& w, const InteriorRange& range, F&& visit) {
    if (v.spec.nodes() == 0 || v.values.empty()) raise(ErrorCode::EmptyGrid, "grid function has no nodes");
    v.spec.validate();
    if (v.values.size() != v.spec.nodes() * static_cast<std::size_t>(v.N))
        raise(ErrorCode::InvalidInput, "value count does not match the grid");
    Scan s;
    for (std::size_t n = 0; n < v.spec.nodes(); ++n) {
        const std::vector<int> idx = v.spec.multi_index(n);
        const double a = eval_weight(w, v.spec.node(n)) * v.at(n).norm();
        s.grid_max = std::max(s.grid_max, a);
        bool face = false;
        for (int k = 0; k < v.spec.dim(); ++k)
            face = face || idx[static_cast<std::size_t>(k)] == 0 || idx[static_cast<std::size_t>(k)] == v.spec.count[static_cast<std::size_t>(k)] - 1;
        if (face) s.face_max = std::max(s.face_max, a);
        if (range.contains(idx)) visit(idx, a);
    }
    return s;
}

}  // namespace

NormResult weighted_lp_norm(const GridFunction& v, const WeightFunction& w, double p, const NormOptions& opt) {
    if (!(p >= 1.0) || std::isinf(p)) raise(ErrorCode::InvalidInput, "p must lie in [1, inf)");
    if (v.spec.count.empty()) raise(ErrorCode::EmptyGrid, "grid has no axes");
    const InteriorRange range = interior_range(v.spec, opt.boundary_fraction);
    double sum = 0.0;
    const Scan s = scan_nodes(v, w, range, [&](const std::vector<int>& idx, double a) {
        double weight = 1.0;
        for (int k = 0; k < v.spec.dim(); ++k) {
            const auto kk = static_cast<std::size_t>(k);
            const bool end = idx[kk] == range.lo[kk] || idx[kk] == range.hi[kk];
            weight *= v.spec.h(k) * (end ? 0.5 : 1.0);
        }
        sum += weight * std::pow(a, p);
    });
    NormResult r;
    r.value = std::pow(sum, 1.0 / p);
    r.boundary_ratio = s.grid_max > 0.0 ? s.face_max / s.grid_max : 0.0;
    r.tail_warning = r.boundary_ratio > opt.tail_threshold;
    return r;
}

NormResult weighted_sup_norm(const GridFunction& v, const WeightFunction& w, const NormOptions& opt) {
    if (v.spec.count.empty()) raise(ErrorCode::EmptyGrid, "grid has no axes");
    const InteriorRange range = interior_range(v.spec, opt.boundary_fraction);
    double best = 0.0;
    const Scan s = scan_nodes(v, w, range, [&](const std::vector<int>&, double a) { best = std::max(best, a); });
    NormResult r;
    r.value = best;
    r.boundary_ratio = s.grid_max > 0.0 ? s.face_max / s.grid_max : 0.0;
    r.tail_warning = r.boundary_ratio > opt.tail_threshold;
    return r;
}

}  // namespace oukit
