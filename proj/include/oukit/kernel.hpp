#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "oukit/linalg.hpp"

namespace oukit {

/// Evaluates H, K, K^i and K^{ji} for a fixed system and time t > 0.
/// Coordinates and the indices i, j are zero-based.
class KernelEvaluator {
public:
    KernelEvaluator(const OUSystem& sys, double t);

    const OUSystem& system() const { return *sys_; }
    double t() const { return t_; }
    const MatrixXr& rotation() const { return R_; }

    /// Eigen-basis factors k_m(|psi|^2) = (4 pi t lambdaA_m)^(-d/2) exp(-lambdaB_m t - |psi|^2/(4 t lambdaA_m)).
    VectorXc diagonal(double r2) const;
    /// 1/(2 t lambdaA_m).
    const VectorXc& inv_2t_lambda() const { return inv2_; }
    /// 1/(4 t lambdaA_m).
    const VectorXc& inv_4t_lambda() const { return inv4_; }
    /// (4 pi t lambdaA_m)^(-d/2) exp(-lambdaB_m t).
    const VectorXc& prefactor() const { return pref_; }

    /// Y diag(v) Y^-1.
    MatrixXc assemble(const VectorXc& v) const;

    MatrixXc K(const VectorXr& psi) const;
    MatrixXc Ki(const VectorXr& psi, int i) const;
    MatrixXc Kji(const VectorXr& psi, int i, int j) const;
    MatrixXc H(const VectorXr& x, const VectorXr& xi) const;

    /// Gaussian envelope width: |k_m(r)| <= |pref_m| exp(-r^2 / sigma^2).
    double sigma() const { return sigma_; }

private:
    const OUSystem* sys_;
    double t_;
    MatrixXr R_;
    VectorXc pref_;
    VectorXc inv4_;
    VectorXc inv2_;
    double sigma_;
};

MatrixXc heat_kernel(const OUSystem& sys, const VectorXr& x, const VectorXr& xi, double t);
MatrixXc kernel_K(const OUSystem& sys, const VectorXr& psi, double t);
MatrixXc kernel_Ki(const OUSystem& sys, const VectorXr& psi, double t, int i);
MatrixXc kernel_Kji(const OUSystem& sys, const VectorXr& psi, double t, int i, int j);

struct RiccatiSolution {
    MatrixXc N;
    cplx phi;
};

struct RiccatiResidual {
    double res_N = 0.0;
    double res_phi = 0.0;
};

/// Closed-form solution of the matrix Riccati system for the scalar case N = 1.
RiccatiSolution riccati_solution(const OUSystem& sys, double t);

/// Residuals of the Riccati system with the time derivative taken by a central difference
/// of step rel_step * t.
RiccatiResidual riccati_residual(const OUSystem& sys, double t, double rel_step = 1e-5);

struct QuadratureOptions {
    double tol = 1e-8;
    int order = 8;
    int max_refinements = 3;
};

struct MatrixQuadrature {
    MatrixXc value;
    double est_error = 0.0;
    long nodes = 0;
};

struct KernelMoments {
    MatrixXc m0;
    std::vector<MatrixXc> m1;               // d entries
    std::vector<std::vector<MatrixXc>> m2;  // d x d entries
    double est_error = 0.0;
    long nodes = 0;
};

/// Tensor-product quadrature of int K psi^beta dpsi for |beta| <= 2 over a truncated box.
KernelMoments kernel_moments_all(const OUSystem& sys, double t, const QuadratureOptions& opt = {});

/// Single moment: order 0 ignores i, j; order 1 uses i; order 2 uses i and j.
MatrixQuadrature kernel_moments(const OUSystem& sys, double t, int order, int i = 0, int j = 0,
                                const QuadratureOptions& opt = {});

struct BoundExtras {
    double p = 1.0;  // may be +infinity for levels 4..6
    double C_theta = 1.0;
    bool delta_ij = true;
};

/// C1..C6 at time t. sq.nu must match the (eta, p) pair of the estimate.
double bound_C(int level, const SpectralQuantities& sq, double t, const BoundExtras& extra = {});

struct ScalarQuadrature {
    double value = 0.0;
    double est_error = 0.0;
};

/// int exp(eta_p |psi|) ||K^beta(psi, t)|| dpsi with |beta| = level (spectral norm).
ScalarQuadrature weighted_kernel_l1(const OUSystem& sys, int level, double eta_p, double t, int i = 0, int j = 0,
                                    double tol = 1e-10);

struct C78 {
    double C7 = 0.0;
    double C8 = 0.0;
};

C78 bound_C78(const SpectralQuantities& sq, double p, double C_theta, double vartheta);

/// Truncation radius R(t) for the kernel envelope with weight exponent eta_p.
double truncation_radius(const SpectralQuantities& sq, double t, double eta_p, double tol);

struct ResidualResult {
    double residual = 0.0;
    double est_error = 0.0;
    long nodes = 0;
};

/// ||int H(x,z,t1) H(z,xi,t2) dz - H(x,xi,t1+t2)|| / ||H(x,xi,t1+t2)||.
ResidualResult chapman_kolmogorov_residual(const OUSystem& sys, const VectorXr& x, const VectorXr& xi, double t1,
                                           double t2, const QuadratureOptions& opt = {});

struct DiracProbe {
    std::vector<double> errors;
    std::vector<double> est_errors;
};

/// ||int H(x,xi,t) phi(xi) dxi - e^{-Bt} phi(x)|| along t_sequence. phi_scale is the length scale of phi.
DiracProbe dirac_limit_probe(const OUSystem& sys, const VectorField& phi, const VectorXr& x,
                             const std::vector<double>& t_sequence, double phi_scale = 1.0,
                             const QuadratureOptions& opt = {});

}  // namespace oukit
