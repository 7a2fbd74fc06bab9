#pragma once

#include <optional>
#include <vector>

#include "oukit/kernel.hpp"
#include "oukit/report.hpp"
#include "oukit/weights.hpp"

namespace oukit {

enum class Interpolation { multilinear, cubic };

/// Piecewise interpolant of grid data; zero outside the grid.
VectorXc interpolate(const GridFunction& v, const VectorXr& x, Interpolation kind = Interpolation::cubic);

/// Analytic input. support_lo/support_hi bound the region where f is non-negligible (empty: unbounded);
/// scale is the smallest length scale of f.
struct Field {
    VectorField f;
    int N = 1;
    VectorXr support_lo;
    VectorXr support_hi;
    double scale = 1.0;
};

Field constant_field(const VectorXc& c, int d);
/// c * exp(-|x - center|^2 / width^2), support cut where the factor drops below 1e-17.
Field gaussian_field(const VectorXc& c, const VectorXr& center, double width);

struct SemigroupOptions {
    Interpolation interpolation = Interpolation::cubic;
    int order = 8;             // Gauss-Legendre points per panel
    double kernel_tol = 1e-16; // kernel window truncation
    double panel_fraction = 1.0;
    double field_panel_fraction = 1.0;  // field-engine panels relative to the kernel width and the field scale
};

/// Values (and optionally first/second x-derivatives) of T(t)v at a set of points.
struct PointValues {
    std::vector<VectorXc> value;
    std::vector<std::vector<VectorXc>> grad;                 // [point][i]
    std::vector<std::vector<std::vector<VectorXc>>> hess;   // [point][i][j]
};

/// Kernel quadrature against the piecewise-polynomial interpolant of grid data.
class GridPropagator {
public:
    GridPropagator(const OUSystem& sys, const GridFunction& v, const SemigroupOptions& opt = {});

    /// [T(t)v](x) for t > 0; derivatives through K^i and K^{ji} when deriv >= 1, 2.
    PointValues semigroup(double t, const std::vector<VectorXr>& points, int deriv = 0) const;
    /// [G(t,0)v](y) = int H(e^{-tS} y, xi, t) v(xi) dxi.
    std::vector<VectorXc> diffusion(double t, const std::vector<VectorXr>& points) const;
    /// True when |v| on the grid faces exceeds 1e-6 of its maximum.
    bool tail_warning() const { return tail_warning_; }

private:
    PointValues evaluate(double t, const std::vector<VectorXr>& points, int deriv, bool diffusion) const;

    const OUSystem* sys_;
    GridSpec spec_;
    SemigroupOptions opt_;
    std::vector<std::vector<cplx>> coeff_;  // [m][node] of Y^-1 v
    bool tail_warning_ = false;
};

/// Tensor Gauss-Legendre quadrature of an analytic field, over the kernel box or the field support box.
class FieldPropagator {
public:
    FieldPropagator(const OUSystem& sys, Field g, const SemigroupOptions& opt = {});
    PointValues semigroup(double t, const std::vector<VectorXr>& points, int deriv = 0) const;

private:
    const OUSystem* sys_;
    Field g_;
    SemigroupOptions opt_;
};

GridFunction apply_semigroup(const OUSystem& sys, const GridFunction& v, double t, const SemigroupOptions& opt = {});
/// First derivatives D_i T(t)v on the grid, kernel route; result[i].
std::vector<GridFunction> semigroup_gradient(const OUSystem& sys, const GridFunction& v, double t,
                                             const SemigroupOptions& opt = {});
/// Second derivatives D_j D_i T(t)v on the grid, kernel route; result[i][j].
std::vector<std::vector<GridFunction>> semigroup_hessian(const OUSystem& sys, const GridFunction& v, double t,
                                                         const SemigroupOptions& opt = {});
VectorXc semigroup_at(const OUSystem& sys, const Field& g, double t, const VectorXr& x, const SemigroupOptions& opt = {});

GridFunction apply_diffusion(const OUSystem& sys, const GridFunction& v, double t, const SemigroupOptions& opt = {});

/// Central-difference derivative of grid data along axis i (one-sided second order at the faces).
GridFunction grid_derivative_fd(const GridFunction& v, int i);

struct NormSpec {
    WeightFunction weight = unit_weight();
    double p = 2.0;  // +infinity selects the weighted sup norm
    double boundary_fraction = 0.1;
};
double grid_norm(const GridFunction& v, const NormSpec& n);
GridFunction difference(const GridFunction& a, const GridFunction& b);

/// ||T(t)T(s)v - T(t+s)v|| / ||T(t+s)v|| on the interior subgrid.
double semigroup_composition_residual(const OUSystem& sys, const GridFunction& v, double s, double t,
                                      const NormSpec& n = {}, const SemigroupOptions& opt = {});

/// max over interior nodes of |T(t)v(x) - G(t,0)v(e^{tS}x)| / max |T(t)v|.
double factorization_residual(const OUSystem& sys, const GridFunction& v, double t, double boundary_fraction = 0.1,
                              const SemigroupOptions& opt = {});

/// A Delta v + <Sx, grad v> - B v by second-order central differences.
VectorXc apply_generator_fd(const OUSystem& sys, const VectorField& v, const VectorXr& x, double h);
/// Grid version; v is interpolated and x must lie at least 2h inside the grid.
VectorXc apply_generator_fd(const OUSystem& sys, const GridFunction& v, const VectorXr& x, double h,
                            Interpolation kind = Interpolation::cubic);

enum class OmegaMode { lp_weighted, cb_unweighted };

struct OmegaBound {
    double omega = 0.0;
    double M = 0.0;
    double C_star = 1.0;
};

/// lp_weighted: omega = -b0 + (1 + epsilon) nu / p, M = C_theta kappa a1^{d/2} C*, with C* the smallest constant
/// (times 1.05) such that C4(t) <= C_theta kappa a1^{d/2} C* e^{omega t} on a log-spaced t grid.
/// cb_unweighted: (-b0, kappa a1^{d/2}).
OmegaBound omega_bound(const SpectralQuantities& sq, OmegaMode mode, double p = 1.0, double C_theta = 1.0,
                       double epsilon = 0.1);

struct ResolventOptions {
    int gl_order = 24;
    double tail_tol = 1e-9;
    double match_tol = 1e-11;
    double min_margin = 1e-3;
    double epsilon = 0.1;
    SemigroupOptions semigroup;
};

/// Nodes and weights for int_0^T e^{-lambda t} F(t) dt with t = s^2 and geometric panels in s.
struct TimeRule {
    std::vector<double> t;
    std::vector<cplx> w;  // includes e^{-lambda t} and the Jacobian 2s
    double T = 0.0;
    double tail_bound = 0.0;
    double omega = 0.0;
};

/// Time rule for lambda with the growth bound of the weight exponent (eta, p); Re(lambda) - omega must
/// exceed the margin.
TimeRule resolvent_time_rule(const OUSystem& sys, cplx lambda, double eta, double p, double C_theta,
                             const ResolventOptions& opt = {});

struct ResolventGrid {
    GridFunction value;
    std::vector<GridFunction> grad;
    double tail_bound = 0.0;
    int time_nodes = 0;
};

/// v* = int_0^inf e^{-lambda t} T(t) g dt on the grid of g (gradients through K^i when requested).
ResolventGrid apply_resolvent(const OUSystem& sys, cplx lambda, const GridFunction& g, bool with_gradient = false,
                              const WeightFunction& weight = unit_weight(), double p = 1.0,
                              const ResolventOptions& opt = {});

/// v* at arbitrary points for an analytic g.
std::vector<VectorXc> resolvent_at(const OUSystem& sys, cplx lambda, const Field& g, const std::vector<VectorXr>& points,
                                   const WeightFunction& weight = unit_weight(), double p = 1.0,
                                   const ResolventOptions& opt = {});

/// ||T(t)v - v|| for each t of a decreasing sequence.
std::vector<double> strong_continuity_probe(const OUSystem& sys, const GridFunction& v, const NormSpec& n,
                                            const std::vector<double>& t_sequence, const SemigroupOptions& opt = {});

/// ||T(t)v||, ||D_i T(t)v|| and ||D_j D_i T(t)v|| against C4, C5 and C6 times ||v|| for each t.
/// Derivatives are central differences of the grid output; ||v|| is taken over the whole grid.
std::vector<VerificationRecord> boundedness_check(const OUSystem& sys, const GridFunction& v, const NormSpec& n,
                                                  const std::vector<double>& t_values, double tolerance = 1e-6,
                                                  const SemigroupOptions& opt = {});

struct ResolventQuery {
    const OUSystem* sys = nullptr;
    cplx lambda = 1.0;
    GridFunction g;
    std::optional<Field> g_field;      // enables the generator-residual record
    WeightFunction theta1 = unit_weight();
    WeightFunction theta2 = unit_weight();
    double vartheta = 0.5;
    double p = 2.0;
    bool sup_mode = false;
    double boundary_fraction = 0.1;
    double tolerance = 1e-6;
    double residual_h = 1e-2;
    int residual_points = 5;
    ResolventOptions options;
};

/// Norm and derivative bounds of the weighted resolvent estimates (pointwise bound in sup mode),
/// plus the generator residual when an analytic g is supplied. Throws HypothesisViolated when eta2
/// exceeds the admissible range.
std::vector<VerificationRecord> resolvent_estimate_check(const ResolventQuery& q);

struct GreensProbe {
    MatrixXc value;
    double est_error = 0.0;
};

/// -int_0^{T_max} H(x, xi, t) dt with the remaining tail bounded by the sup envelope of H.
GreensProbe greens_function_probe(const OUSystem& sys, const VectorXr& x, const VectorXr& xi, double T_max,
                                  double tol = 1e-10);

}  // namespace oukit
