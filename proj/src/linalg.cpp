#include "oukit/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "oukit/errors.hpp"

namespace oukit {

namespace {

double offdiag_norm(const MatrixXc& M) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            if (i != j) s += std::norm(M(i, j));
    return std::sqrt(s);
}

// Scale each column so that its first entry of maximal modulus equals one.
void normalize_columns(MatrixXc& Y) {
    for (Eigen::Index j = 0; j < Y.cols(); ++j) {
        double m = Y.col(j).cwiseAbs().maxCoeff();
        if (m == 0.0) continue;
        Eigen::Index k = 0;
        for (Eigen::Index i = 0; i < Y.rows(); ++i) {
            if (std::abs(Y(i, j)) >= (1.0 - 1e-10) * m) {
                k = i;
                break;
            }
        }
        Y.col(j) /= Y(k, j);
    }
}

bool less_with_tol(double x, double y, double scale) {
    return x < y - 1e-12 * std::max(1.0, scale);
}

struct Candidate {
    MatrixXc Y;
    MatrixXc Yinv;
    VectorXc la;
    VectorXc lb;
};

bool try_diagonalize(const MatrixXc& A, const MatrixXc& B, cplx gamma, const ValidationTolerances& tol,
                     Candidate& out) {
    const Eigen::Index n = A.rows();
    Eigen::ComplexEigenSolver<MatrixXc> es(A + gamma * B, true);
    if (es.info() != Eigen::Success) return false;
    MatrixXc Y = es.eigenvectors();
    normalize_columns(Y);
    if (!Y.allFinite() || condition_number(Y) > tol.max_condition) return false;
    Eigen::FullPivLU<MatrixXc> lu(Y);
    if (!lu.isInvertible()) return false;
    MatrixXc Yinv = lu.inverse();
    MatrixXc DA = Yinv * A * Y;
    MatrixXc DB = Yinv * B * Y;
    const double nA = A.norm();
    const double nB = B.norm();
    if (offdiag_norm(DA) > tol.simultaneity * std::max(nA, 1e-300)) return false;
    if (nB > 0.0 && offdiag_norm(DB) > tol.simultaneity * nB) return false;

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    const double scale = nA + nB;
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
        const cplx ai = DA(i, i), aj = DA(j, j), bi = DB(i, i), bj = DB(j, j);
        if (less_with_tol(ai.real(), aj.real(), scale)) return true;
        if (less_with_tol(aj.real(), ai.real(), scale)) return false;
        if (less_with_tol(ai.imag(), aj.imag(), scale)) return true;
        if (less_with_tol(aj.imag(), ai.imag(), scale)) return false;
        if (less_with_tol(bi.real(), bj.real(), scale)) return true;
        if (less_with_tol(bj.real(), bi.real(), scale)) return false;
        return less_with_tol(bi.imag(), bj.imag(), scale);
    });
    out.Y.resize(n, n);
    out.la.resize(n);
    out.lb.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.Y.col(k) = Y.col(order[static_cast<std::size_t>(k)]);
        out.la(k) = DA(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
        out.lb(k) = DB(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
    }
    out.Yinv = out.Y.fullPivLu().inverse();

    const MatrixXc recA = out.Y * out.la.asDiagonal() * out.Yinv;
    const MatrixXc recB = out.Y * out.lb.asDiagonal() * out.Yinv;
    if ((recA - A).norm() > tol.reconstruction * std::max(nA, 1e-300)) return false;
    if (nB > 0.0 && (recB - B).norm() > tol.reconstruction * nB) return false;
    return true;
}

}  // namespace

double spectral_norm(const MatrixXc& M) {
    if (M.size() == 0) return 0.0;
    if (M.size() == 1) return std::abs(M(0, 0));
    Eigen::JacobiSVD<MatrixXc> svd(M);
    return svd.singularValues()(0);
}

double condition_number(const MatrixXc& M) {
    Eigen::JacobiSVD<MatrixXc> svd(M);
    const auto& s = svd.singularValues();
    const double smin = s(s.size() - 1);
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return s(0) / smin;
}

OUSystem validate_system(const MatrixXc& A, const MatrixXc& B, const MatrixXr& S,
                         const ValidationTolerances& tol) {
    if (A.rows() != A.cols() || A.rows() < 1) raise(ErrorCode::InvalidInput, "A must be square and non-empty");
    if (B.rows() != B.cols() || B.rows() != A.rows()) {
        raise(ErrorCode::InvalidInput, "B must be square with the size of A");
    }
    if (S.rows() != S.cols() || S.rows() < 2) raise(ErrorCode::InvalidInput, "S must be square with d >= 2");
    if (!A.allFinite() || !B.allFinite() || !S.allFinite()) raise(ErrorCode::InvalidInput, "non-finite entries");

    const double skew_defect = (S + S.transpose()).norm();
    if (skew_defect > tol.skew * std::max(1.0, S.norm())) {
        raise(ErrorCode::NotSkew, "||S + S^T|| = " + std::to_string(skew_defect));
    }

    Eigen::ComplexEigenSolver<MatrixXc> esA(A, true);
    for (Eigen::Index k = 0; k < A.rows(); ++k) {
        if (!(esA.eigenvalues()(k).real() > 0.0)) {
            raise(ErrorCode::NonEllipticA, "eigenvalue of A with non-positive real part");
        }
    }
    MatrixXc VA = esA.eigenvectors();
    normalize_columns(VA);
    if (condition_number(VA) > tol.max_condition) {
        raise(ErrorCode::NotDiagonalizable, "eigenvector matrix of A is numerically singular");
    }
    Eigen::ComplexEigenSolver<MatrixXc> esB(B, true);
    MatrixXc VB = esB.eigenvectors();
    normalize_columns(VB);
    if (B.norm() > 0.0 && condition_number(VB) > tol.max_condition) {
        raise(ErrorCode::NotDiagonalizable, "eigenvector matrix of B is numerically singular");
    }

    const cplx gammas[] = {cplx(0.0, 0.0), cplx(0.6180339887, 0.4142135624), cplx(-0.3141592654, 0.2718281828),
                           cplx(1.7320508076, -0.5772156649), cplx(0.0, 1.0)};
    Candidate c;
    bool ok = false;
    for (const cplx& g : gammas) {
        if (try_diagonalize(A, B, g, tol, c)) {
            ok = true;
            break;
        }
    }
    if (!ok) raise(ErrorCode::NotSimultaneous, "no common eigenbasis of A and B within tolerance");

    OUSystem sys;
    sys.A = A;
    sys.B = B;
    sys.S = 0.5 * (S - S.transpose());
    sys.d = static_cast<int>(S.rows());
    sys.N = static_cast<int>(A.rows());
    sys.Y = c.Y;
    sys.Yinv = c.Yinv;
    sys.lambdaA = c.la;
    sys.lambdaB = c.lb;
    return sys;
}

OUSystem make_scalar_system(cplx alpha, cplx delta, const MatrixXr& S) {
    MatrixXc A(1, 1), B(1, 1);
    A(0, 0) = alpha;
    B(0, 0) = delta;
    return validate_system(A, B, S);
}

SpectralQuantities spectral_quantities(const OUSystem& sys, double eta, double p) {
    if (!(eta >= 0.0)) raise(ErrorCode::InvalidInput, "eta must be non-negative");
    if (!(p >= 1.0) || !std::isfinite(p)) raise(ErrorCode::InvalidInput, "p must lie in [1, inf)");
    SpectralQuantities q;
    q.a_min = sys.lambdaA.cwiseAbs().minCoeff();
    q.a_max = sys.lambdaA.cwiseAbs().maxCoeff();
    q.a0 = sys.lambdaA.real().minCoeff();
    q.b0 = sys.lambdaB.real().minCoeff();
    q.kappa = std::max(1.0, condition_number(sys.Y));
    q.a1 = q.a_max * q.a_max / (q.a_min * q.a0);
    q.nu = q.a_max * q.a_max * eta * eta * p * p / q.a0;
    q.d = sys.d;
    q.eta = eta;
    q.p = p;
    return q;
}

MatrixXc matrix_function(const OUSystem& sys, const std::function<cplx(cplx)>& f, Which which) {
    const VectorXc& lam = which == Which::A ? sys.lambdaA : sys.lambdaB;
    VectorXc fv(lam.size());
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
        fv(k) = f(lam(k));
        if (!std::isfinite(fv(k).real()) || !std::isfinite(fv(k).imag())) {
            raise(ErrorCode::InvalidInput, "matrix function is not finite on the spectrum");
        }
    }
    return sys.Y * fv.asDiagonal() * sys.Yinv;
}

cplx principal_power(cplx z, double s) {
    const bool integer = std::abs(s - std::round(s)) == 0.0;
    if (!integer) {
        const double tol = 1e-15 * std::abs(z);
        if (std::abs(z) == 0.0 || (z.real() < 0.0 && std::abs(z.imag()) <= tol)) {
            raise(ErrorCode::BranchCutHit, "fractional power on the negative real axis");
        }
        return std::pow(z, s);
    }
    return std::pow(z, static_cast<int>(std::round(s)));
}

MatrixXc matrix_power(const OUSystem& sys, double s, Which which) {
    return matrix_function(sys, [s](cplx z) { return principal_power(z, s); }, which);
}

RotationGenerator::RotationGenerator(const MatrixXr& S) {
    const MatrixXr K = 0.5 * (S - S.transpose());
    zero_ = K.norm() == 0.0;
    // iK is Hermitian: iK = U diag(mu) U^*, so e^{tK} = U diag(e^{-i t mu}) U^*.
    MatrixXc H = cplx(0.0, 1.0) * K.cast<cplx>();
    Eigen::SelfAdjointEigenSolver<MatrixXc> es(H);
    U_ = es.eigenvectors();
    mu_ = es.eigenvalues();
}

MatrixXr RotationGenerator::at(double t) const {
    const Eigen::Index n = U_.rows();
    if (zero_ || t == 0.0) return MatrixXr::Identity(n, n);
    VectorXc ph(n);
    for (Eigen::Index k = 0; k < n; ++k) ph(k) = std::exp(cplx(0.0, -t * mu_(k)));
    return (U_ * ph.asDiagonal() * U_.adjoint()).real();
}

MatrixXr rotation(const MatrixXr& S, double t) {
    if (S.rows() != S.cols()) raise(ErrorCode::InvalidInput, "S must be square");
    if ((S + S.transpose()).norm() > 1e-12 * std::max(1.0, S.norm())) raise(ErrorCode::NotSkew, "S is not skew");
    return RotationGenerator(S).at(t);
}

}  // namespace oukit
