#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "oukit/linalg.hpp"

namespace oukit {

enum class WeightKind { exp_abs, cosh_abs, exp_smooth, cosh_smooth, unit, custom };

const char* to_string(WeightKind kind) noexcept;
WeightKind weight_kind_from_string(const std::string& name);

/// Radial weights of exponential growth rate eta:
///   exp_abs     exp(-mu |x|)
///   cosh_abs    cosh(mu |x|)
///   exp_smooth  exp(-mu sqrt(|x|^2 + 1))
///   cosh_smooth cosh(mu sqrt(|x|^2 + 1))
struct WeightFunction {
    WeightKind kind = WeightKind::unit;
    double mu = 0.0;
    double eta = 0.0;
    double C_theta = 1.0;
    std::function<double(const VectorXr&)> custom;
};

WeightFunction make_weight(WeightKind kind, double mu = 0.0);
WeightFunction unit_weight();
WeightFunction custom_weight(std::function<double(const VectorXr&)> f, double eta, double C_theta);

double eval_weight(const WeightFunction& w, const VectorXr& x);
/// log(theta(x)); exact for large arguments of the named families.
double log_weight(const WeightFunction& w, const VectorXr& x);
/// Radial profile theta(r) of a named family.
double eval_weight_radial(const WeightFunction& w, double r);
bool is_radial(const WeightFunction& w);

/// Lower envelope theta(x) >= C_tilde exp(nu |x|).
struct LowerEnvelope {
    double C_tilde = 1.0;
    double nu = 0.0;
};
LowerEnvelope lower_envelope(const WeightFunction& w, int dim = 2);

inline constexpr std::uint64_t kDefaultSeed = 20240917;

struct AxiomSampling {
    int dim = 2;
    double radius = 10.0;
    std::uint64_t seed = kDefaultSeed;
};

/// C_observed = max over samples of theta(x+y) / (theta(x) exp(eta |y|));
/// max_violation = max(0, C_observed / C_theta - 1).
struct EnvelopeCheck {
    double max_violation = 0.0;
    double C_observed = 0.0;
};
EnvelopeCheck check_growth_envelope(const WeightFunction& w, int sample_count, const AxiomSampling& s = {});

struct TranslationCheck {
    std::vector<double> ratios;             // sup_x |theta(x+psi) - theta(x)| / theta(x) per psi
    std::optional<double> gradient_ratio;   // max |grad theta| / (|mu| theta) for the smooth families
};
TranslationCheck check_translation_regularity(const WeightFunction& w, const std::vector<VectorXr>& psi_sequence,
                                              int sample_count = 2000, const AxiomSampling& s = {});

/// max over samples of |theta(e^{tS} x) - theta(x)| / theta(x).
double check_rotation_invariance(const WeightFunction& w, const MatrixXr& S, const std::vector<double>& t_samples,
                                 int x_samples = 200, const AxiomSampling& s = {});

/// Rectangular grid, uniform per axis; axis 0 varies fastest in the node numbering.
struct GridSpec {
    std::vector<double> min;
    std::vector<double> max;
    std::vector<int> count;

    int dim() const { return static_cast<int>(count.size()); }
    double h(int axis) const;
    double coord(int axis, int i) const;
    std::size_t nodes() const;
    VectorXr node(std::size_t index) const;
    std::vector<int> multi_index(std::size_t index) const;
    std::size_t flat_index(const std::vector<int>& idx) const;
    void validate() const;
};

/// Uniform grid [lo, hi]^d with n nodes per axis.
GridSpec cube_grid(int d, double lo, double hi, int n);
/// Parses "min:max:count,min:max:count,...".
GridSpec parse_grid_spec(const std::string& text);

/// Complex N-vector samples; values[node * N + k].
struct GridFunction {
    GridSpec spec;
    int N = 1;
    std::vector<cplx> values;

    VectorXc at(std::size_t node) const;
    void set(std::size_t node, const VectorXc& v);
};

GridFunction sample(const GridSpec& spec, int N, const VectorField& f);

/// Index ranges excluding a boundary layer of the given fraction of the extent per side.
struct InteriorRange {
    std::vector<int> lo;
    std::vector<int> hi;  // inclusive
    bool contains(const std::vector<int>& idx) const;
};
InteriorRange interior_range(const GridSpec& spec, double boundary_fraction);

struct NormOptions {
    double boundary_fraction = 0.0;
    double tail_threshold = 1e-6;
};

struct NormResult {
    double value = 0.0;
    bool tail_warning = false;
    double boundary_ratio = 0.0;  // max of theta|v| on the grid faces over the grid max
    operator double() const { return value; }
};

/// Composite-trapezoid approximation of (int |theta v|^p)^(1/p); |.| is the Euclidean norm on C^N.
NormResult weighted_lp_norm(const GridFunction& v, const WeightFunction& w, double p, const NormOptions& opt = {});
/// max over nodes of theta(x) |v(x)|.
NormResult weighted_sup_norm(const GridFunction& v, const WeightFunction& w, const NormOptions& opt = {});

}  // namespace oukit
