#pragma once
//
// Right preconditioners from a CountGauss sketch and a preconditioned LSQR.
//
// Both routes start from the pivoted QR  Ã P = Q R  of the sketch:
//
//   qr   N = P_k R_k^{-1}
//   svd  N = V_k Sigma_k^{-1}; when k = d this equals P R^{-1} U_R with
//        R = U_R Sigma V_R^T, and N is applied in that factored form.
//
// Applying N through triangular solves keeps A N accurate when kappa(A) is
// large; forming A times an explicit N loses about eps kappa(A) relative.
//

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "kernels.hpp"
#include "matrix.hpp"
#include "rankrevealing.hpp"
#include "sketch.hpp"

namespace lspack {

enum class precond_route { svd, qr, identity };

inline std::string to_string(precond_route r) {
    switch (r) {
    case precond_route::svd: return "svd";
    case precond_route::qr: return "qr";
    case precond_route::identity: return "identity";
    }
    return "unknown";
}

struct Certificate {
    index_t               k     = 0;
    index_t               m     = 0;
    double                alpha = 0.0;
    double                eps   = 0.0;
    std::optional<double> kappa_bound;      // absent when alpha is outside its domain
    std::optional<double> kappa_measured;   // filled by verify_preconditioner
};

// kappa(A N) <= xi eta.
inline double kappa_bound(double alpha, index_t m, index_t k, double eps) {
    return xi_factor(alpha, k, m) * eta_factor(eps);
}

class Preconditioner {
public:
    index_t       rank() const { return k_; }
    index_t       dim() const { return d_; }
    precond_route route() const { return route_; }
    const DenseMatrix & N() const { return N_; }
    Certificate &       certificate() { return cert_; }
    const Certificate & certificate() const { return cert_; }

    static Preconditioner identity(index_t d) {
        Preconditioner p;
        p.route_ = precond_route::identity;
        p.d_ = p.k_ = d;
        p.N_        = DenseMatrix::Identity(d, d);
        p.cert_.k   = d;
        return p;
    }

    // N y
    Vector apply(const Vector & y) const {
        if (y.size() != k_)
            throw usage_error("Preconditioner::apply: expected length " + std::to_string(k_));
        if (route_ == precond_route::identity)
            return y;
        if (!factored_)
            return N_ * y;
        Vector t = omega_ ? Vector(*omega_ * y) : y;
        R_.triangularView<Eigen::Upper>().solveInPlace(t);
        Vector x = Vector::Zero(d_);
        for (index_t j = 0; j < k_; ++j)
            x[perm_[static_cast<std::size_t>(j)]] = t[j];
        return x;
    }

    // N^T x
    Vector apply_transpose(const Vector & x) const {
        if (x.size() != d_)
            throw usage_error("Preconditioner::apply_transpose: expected length " + std::to_string(d_));
        if (route_ == precond_route::identity)
            return x;
        if (!factored_)
            return N_.transpose() * x;
        Vector t(k_);
        for (index_t j = 0; j < k_; ++j)
            t[j] = x[perm_[static_cast<std::size_t>(j)]];
        R_.transpose().triangularView<Eigen::Lower>().solveInPlace(t);
        return omega_ ? Vector(omega_->transpose() * t) : t;
    }

    // A N as a dense n x k matrix.
    DenseMatrix apply_to(const SparseMatrix & A) const {
        if (A.cols() != d_)
            throw usage_error("Preconditioner::apply_to: column count mismatch");
        if (route_ == precond_route::identity)
            return A.to_dense();
        if (!factored_)
            return multiply(A, N_);
        std::vector<index_t> K(perm_.begin(), perm_.begin() + k_);
        DenseMatrix          Y = select_columns(A, K).to_dense();
        R_.triangularView<Eigen::Upper>().solveInPlace<Eigen::OnTheRight>(Y);
        if (omega_)
            Y = Y * *omega_;
        return Y;
    }

    friend Preconditioner make_preconditioner(const DenseMatrix & sketched, double zeta, precond_route route);

private:
    precond_route        route_ = precond_route::svd;
    index_t              d_ = 0, k_ = 0;
    DenseMatrix          N_;
    bool                 factored_ = false;
    std::vector<index_t> perm_;
    DenseMatrix          R_;
    std::optional<DenseMatrix> omega_;
    Certificate          cert_;
};

//
// Preconditioner from an already computed sketch Ã (m x d). Rank is the
// count of singular values of Ã above zeta sigma_1 for both routes.
//
inline Preconditioner make_preconditioner(const DenseMatrix & sketched, double zeta, precond_route route) {
    const index_t m = sketched.rows();
    const index_t d = sketched.cols();
    if (route == precond_route::identity)
        return Preconditioner::identity(d);
    if (m < d)
        throw usage_error("sketch has fewer rows than columns");
    if (d == 0 || sketched.cwiseAbs().maxCoeff() == 0.0)
        throw numerical_error("zero matrix has no preconditioner");

    const PivotedQR qr = pivoted_qr(sketched);
    DenseMatrix     R  = qr.R.topRows(d);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(R), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd &           sigma = svd.singularValues();
    const index_t                     k     = detect_rank_svd(as_span(sigma), zeta);
    if (k == 0)
        throw numerical_error("sketch has numerical rank 0 at cutoff " + std::to_string(zeta));

    Preconditioner p;
    p.route_ = route;
    p.d_     = d;
    p.k_     = k;
    p.perm_  = qr.perm;

    if (route == precond_route::qr) {
        p.factored_ = true;
        p.R_        = R.topLeftCorner(k, k);
        DenseMatrix Rinv = p.R_.triangularView<Eigen::Upper>().solve(DenseMatrix::Identity(k, k));
        p.N_             = DenseMatrix::Zero(d, k);
        for (index_t j = 0; j < k; ++j)
            p.N_.row(qr.perm[static_cast<std::size_t>(j)]) = Rinv.row(j);
    } else {
        // V = P V_R
        DenseMatrix V = DenseMatrix::Zero(d, d);
        for (index_t j = 0; j < d; ++j)
            V.row(qr.perm[static_cast<std::size_t>(j)]) = svd.matrixV().row(j);
        p.N_ = V.leftCols(k) * sigma.head(k).cwiseInverse().asDiagonal();
        if (k == d) {
            p.factored_ = true;
            p.R_        = R;
            p.omega_    = DenseMatrix(svd.matrixU());
        }
    }

    auto & c = p.cert_;
    c.k      = k;
    c.m      = m;
    c.alpha  = alpha_for_failure(m, 0.01);
    try {
        c.kappa_bound = kappa_bound(c.alpha, m, k, 0.0);
    } catch (const usage_error &) {
        c.kappa_bound.reset();
    }
    return p;
}

inline Preconditioner build_preconditioner(const SparseMatrix & A, double gamma, double delta, double eps, double zeta,
                                           std::uint64_t seed, precond_route route = precond_route::svd,
                                           const CountGaussOptions & opts = {}) {
    if (route == precond_route::identity)
        return Preconditioner::identity(A.cols());
    const DenseMatrix At = countgauss_sketch(A, gamma, delta, eps, seed, opts);
    Preconditioner    p  = make_preconditioner(At, zeta, route);
    auto &            c  = p.certificate();
    c.eps                = eps;
    try {
        c.kappa_bound = kappa_bound(c.alpha, c.m, c.k, eps);
    } catch (const usage_error &) {
        c.kappa_bound.reset();
    }
    return p;
}

// Singular values of a dense matrix, decreasing.
inline Eigen::VectorXd singular_values(const DenseMatrix & M) {
    Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::ColPivHouseholderQRPreconditioner> svd{Eigen::MatrixXd(M)};
    return svd.singularValues();
}

// kappa_2(A N) from the dense product; fills the certificate.
inline double verify_preconditioner(const SparseMatrix & A, Preconditioner & p) {
    const Eigen::VectorXd s = singular_values(p.apply_to(A));
    const double          kappa = s.size() == 0 || s[s.size() - 1] == 0.0
                                      ? std::numeric_limits<double>::infinity()
                                      : s[0] / s[s.size() - 1];
    p.certificate().kappa_measured = kappa;
    return kappa;
}

struct LsqrResult {
    Vector              x;
    index_t             iterations = 0;
    std::vector<double> residual_history;   // ||b - A N y_j||, j = 0..iterations
    bool                converged = false;
};

//
// LSQR (Golub-Kahan bidiagonalization) on y -> A (N y) from y = 0; returns
// x = N y. Stops when ||(AN)^T r|| / (||AN|| ||r||) <= tol, where ||AN|| is
// the running Frobenius estimate of the bidiagonal, or when ||r|| <= tol ||b||.
//
inline LsqrResult lsqr_preconditioned(const SparseMatrix & A, const Preconditioner & P, const Vector & b, double tol,
                                      index_t max_iter) {
    if (b.size() != A.rows())
        throw usage_error("lsqr: right-hand side length differs from row count");
    if (P.dim() != A.cols())
        throw usage_error("lsqr: preconditioner dimension differs from column count");

    const auto op   = [&](const Vector & y) { return multiply(A, P.apply(y)); };
    const auto op_t = [&](const Vector & u) { return P.apply_transpose(multiply_transpose(A, u)); };

    LsqrResult res;
    const index_t k = P.rank();
    Vector        y = Vector::Zero(k);

    Vector u    = b;
    double beta = u.norm();
    res.residual_history.push_back(beta);
    if (beta == 0.0) {
        res.x         = P.apply(y);
        res.converged = true;
        return res;
    }
    u /= beta;
    Vector v     = op_t(u);
    double alpha = v.norm();
    if (alpha == 0.0) {
        // b is orthogonal to range(A N)
        res.x         = P.apply(y);
        res.converged = true;
        return res;
    }
    v /= alpha;

    Vector       w      = v;
    double       phibar = beta;
    double       rhobar = alpha;
    double       anorm2 = 0.0;
    const double bnorm  = beta;

    for (index_t it = 1; it <= max_iter; ++it) {
        u         = op(v) - alpha * u;
        beta      = u.norm();
        anorm2   += alpha * alpha + beta * beta;
        if (beta > 0.0) {
            u /= beta;
            v     = op_t(u) - beta * v;
            alpha = v.norm();
            if (alpha > 0.0)
                v /= alpha;
        } else {
            alpha = 0.0;
        }

        const double rho   = std::hypot(rhobar, beta);
        const double c     = rhobar / rho;
        const double s     = beta / rho;
        const double theta = s * alpha;
        rhobar             = -c * alpha;
        const double phi   = c * phibar;
        phibar             = s * phibar;

        y += (phi / rho) * w;
        w  = v - (theta / rho) * w;

        res.iterations = it;
        res.residual_history.push_back(phibar);

        const double rnorm  = phibar;
        const double arnorm = phibar * alpha * std::abs(c);
        const double anorm  = std::sqrt(anorm2);
        if (rnorm <= tol * bnorm || arnorm <= tol * anorm * rnorm || alpha == 0.0) {
            res.converged = true;
            break;
        }
    }
    res.x = P.apply(y);
    return res;
}

} // namespace lspack
