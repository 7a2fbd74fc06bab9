#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>

namespace oukit {

using cplx = std::complex<double>;
using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;
using MatrixXr = Eigen::MatrixXd;
using VectorXr = Eigen::VectorXd;

using VectorField = std::function<VectorXc(const VectorXr&)>;

struct ValidationTolerances {
    double max_condition = 1e8;
    double simultaneity = 1e-9;
    double skew = 1e-12;
    double reconstruction = 1e-10;
};

/// Triple (A, B, S) with its simultaneous diagonalization A = Y diag(lambdaA) Y^-1,
/// B = Y diag(lambdaB) Y^-1. Build through validate_system.
struct OUSystem {
    MatrixXc A;
    MatrixXc B;
    MatrixXr S;
    int d = 0;
    int N = 0;
    MatrixXc Y;
    MatrixXc Yinv;
    VectorXc lambdaA;
    VectorXc lambdaB;
};

struct SpectralQuantities {
    double a_min = 0.0;
    double a_max = 0.0;
    double a0 = 0.0;
    double b0 = 0.0;
    double kappa = 1.0;
    double a1 = 1.0;
    double nu = 0.0;
    int d = 0;
    double eta = 0.0;
    double p = 1.0;
};

enum class Which { A, B };

OUSystem validate_system(const MatrixXc& A, const MatrixXc& B, const MatrixXr& S,
                         const ValidationTolerances& tol = {});

SpectralQuantities spectral_quantities(const OUSystem& sys, double eta, double p);

/// Y diag(f(lambda_k)) Y^-1 for the eigenvalues of A or B.
MatrixXc matrix_function(const OUSystem& sys, const std::function<cplx(cplx)>& f, Which which);

/// Principal branch z^s, arg in (-pi, pi]. Throws BranchCutHit on the closed negative real axis
/// (and at zero) unless s is an integer.
cplx principal_power(cplx z, double s);

/// Fractional power of A or B through the diagonalization, principal branch.
MatrixXc matrix_power(const OUSystem& sys, double s, Which which);

/// e^{tS} for skew-symmetric S.
MatrixXr rotation(const MatrixXr& S, double t);

/// Cached eigendecomposition of a skew matrix; evaluates e^{tS} for many t.
class RotationGenerator {
public:
    RotationGenerator() = default;
    explicit RotationGenerator(const MatrixXr& S);
    MatrixXr at(double t) const;
    int dim() const { return static_cast<int>(U_.rows()); }
    bool is_zero() const { return zero_; }

private:
    MatrixXc U_;
    VectorXr mu_;
    bool zero_ = true;
};

double spectral_norm(const MatrixXc& M);
double condition_number(const MatrixXc& M);

OUSystem make_scalar_system(cplx alpha, cplx delta, const MatrixXr& S);

}  // namespace oukit
