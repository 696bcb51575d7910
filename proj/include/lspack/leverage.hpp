#pragma once
//
// Leverage score estimators:
//
//   gram_svd    eigendecomposition of A^T A, truncated at zeta
//   spqr        Q-less column-pivoted Gram-Schmidt, scores from A_K R_k^{-1}
//   hrn_exact   CountGauss column selection, then gram_svd on A_K
//   sketched    scores of A_K through the SVD of a sketch Pi_1 A_K
//   hrn_approx  CountGauss column selection, then sketched on A_K
//
// plus the evaluators of the error bounds used to validate them.
//

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "kernels.hpp"
#include "matrix.hpp"
#include "rankrevealing.hpp"
#include "sketch.hpp"

namespace lspack {

enum class leverage_method { gram_svd, spqr, hrn_exact, sketched, hrn_approx };

inline std::string to_string(leverage_method m) {
    switch (m) {
    case leverage_method::gram_svd: return "gram_svd";
    case leverage_method::spqr: return "spqr";
    case leverage_method::hrn_exact: return "hrn_exact";
    case leverage_method::sketched: return "sketched";
    case leverage_method::hrn_approx: return "hrn_approx";
    }
    return "unknown";
}

// Accepts both "gram_svd" and "gram-svd" spellings.
inline leverage_method parse_leverage_method(std::string s) {
    std::replace(s.begin(), s.end(), '-', '_');
    for (auto m : {leverage_method::gram_svd, leverage_method::spqr, leverage_method::hrn_exact,
                   leverage_method::sketched, leverage_method::hrn_approx})
        if (to_string(m) == s)
            return m;
    throw usage_error("unknown leverage method '" + s + "'");
}

struct LeverageParams {
    double                    zeta = default_rcond;
    double                    eps  = default_eps;
    std::uint64_t             seed = default_seed;
    std::optional<SketchSpec> pi1;
    std::optional<SketchSpec> pi2;
};

struct LeverageScores {
    std::vector<double>         scores;
    index_t                     k      = 0;
    leverage_method             method = leverage_method::gram_svd;
    std::optional<ColumnSubset> subset;
    LeverageParams              params;

    double sum() const { return std::accumulate(scores.begin(), scores.end(), 0.0); }
    double coherence() const { return scores.empty() ? 0.0 : *std::max_element(scores.begin(), scores.end()); }
};

namespace detail {

// Right factor X = V_k Sigma_k^{-1} from the Gram eigendecomposition, with
// sigma = sqrt(max(lambda, 0)) sorted decreasing and truncated at zeta.
struct GramFactor {
    DenseMatrix     X;
    Eigen::VectorXd sigma;
    index_t         k = 0;
};

inline GramFactor gram_factor(const SparseMatrix & A, double zeta) {
    const index_t d = A.cols();
    GramFactor    out;
    if (d == 0) {
        out.X = DenseMatrix(0, 0);
        return out;
    }
    const Eigen::MatrixXd                          B = gram(A);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(B);
    if (eig.info() != Eigen::Success)
        throw numerical_error("Gram eigendecomposition failed");
    // Eigenvalues ascending; reverse to singular-value order. Eigenvalues
    // at or below d eps lambda_max are roundoff and count as zero.
    const double lmax  = std::max(eig.eigenvalues()[d - 1], 0.0);
    const double floor = static_cast<double>(d) * std::numeric_limits<double>::epsilon() * lmax;
    out.sigma.resize(d);
    for (index_t j = 0; j < d; ++j) {
        const double l = eig.eigenvalues()[d - 1 - j];
        out.sigma[j]   = l > floor ? std::sqrt(l) : 0.0;
    }
    out.k = detect_rank_svd(as_span(out.sigma), zeta);
    out.X.resize(d, out.k);
    for (index_t j = 0; j < out.k; ++j)
        out.X.col(j) = eig.eigenvectors().col(d - 1 - j) / out.sigma[j];
    return out;
}

} // namespace detail

inline LeverageScores leverage_gram_svd(const SparseMatrix & A, double zeta = default_rcond) {
    const auto     f = detail::gram_factor(A, zeta);
    LeverageScores out;
    out.method      = leverage_method::gram_svd;
    out.k           = f.k;
    out.params.zeta = zeta;
    out.scores      = f.k > 0 ? product_row_norms(A, f.X) : std::vector<double>(static_cast<std::size_t>(A.rows()), 0.0);
    return out;
}

//
// Column-pivoted Gram-Schmidt on dense copies of A's columns. Each step
// pivots on exact (recomputed) remaining norms and orthogonalizes twice.
// Stops when the largest remaining norm falls below zeta times the first
// pivot norm, at max_k, or on breakdown.
//
inline LeverageScores leverage_spqr(const SparseMatrix & A, double zeta = default_rcond, index_t max_k = -1) {
    const index_t n = A.rows();
    const index_t d = A.cols();
    if (max_k < 0 || max_k > d)
        max_k = d;

    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, d);
    for (index_t i = 0; i < n; ++i) {
        const auto r = A.row(i);
        for (std::size_t p = 0; p < r.size(); ++p)
            W(i, r.cols[p]) = r.vals[p];
    }

    std::vector<index_t> remaining(static_cast<std::size_t>(d));
    std::iota(remaining.begin(), remaining.end(), 0);
    std::vector<index_t> K;
    Eigen::MatrixXd      coef = Eigen::MatrixXd::Zero(d, d);   // coef(step, column)
    std::vector<double>  pivots;
    double               first = 0.0;

    while (static_cast<index_t>(K.size()) < max_k && !remaining.empty()) {
        std::size_t best      = 0;
        double      best_norm = -1.0;
        for (std::size_t c = 0; c < remaining.size(); ++c) {
            const double v = W.col(remaining[c]).norm();
            if (v > best_norm || (v == best_norm && remaining[c] < remaining[best])) {
                best_norm = v;
                best      = c;
            }
        }
        if (K.empty())
            first = best_norm;
        if (best_norm <= 0.0 || best_norm < zeta * first)
            break;

        const index_t   col  = remaining[best];
        const index_t   step = static_cast<index_t>(K.size());
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
        coef(step, col) = best_norm;
        const Eigen::VectorXd q = W.col(col) / best_norm;
        W.col(col).setZero();
        for (int pass = 0; pass < 2; ++pass) {
            for (const index_t c : remaining) {
                const double h = q.dot(W.col(c));
                W.col(c) -= h * q;
                coef(step, c) += h;
            }
        }
        K.push_back(col);
        pivots.push_back(best_norm);
    }

    const auto k = static_cast<index_t>(K.size());
    DenseMatrix R(k, k);
    R.setZero();
    for (index_t i = 0; i < k; ++i)
        for (index_t j = i; j < k; ++j)
            R(i, j) = coef(i, K[static_cast<std::size_t>(j)]);

    LeverageScores out;
    out.method      = leverage_method::spqr;
    out.k           = k;
    out.params.zeta = zeta;
    if (k == 0) {
        out.scores.assign(static_cast<std::size_t>(n), 0.0);
    } else {
        const DenseMatrix Rinv = R.triangularView<Eigen::Upper>().solve(DenseMatrix::Identity(k, k));
        out.scores             = product_row_norms(select_columns(A, K), Rinv);
    }
    out.subset = ColumnSubset{K, k, R, pivots};
    return out;
}

// Internal sketch parameters of the column selection step.
inline constexpr double selection_gamma = 2.0;
inline constexpr double selection_eps   = 0.5;
inline constexpr double selection_delta = 1.0 / 3.0;

inline LeverageScores leverage_hrn_exact(const SparseMatrix & A, double zeta = default_rcond,
                                         std::uint64_t seed = default_seed, const CountGaussOptions & opts = {}) {
    const auto   sel = countgauss_srrqr(A, selection_gamma, selection_eps, selection_delta, zeta, seed, opts);
    const auto   AK  = select_columns(A, sel.subset.perm);
    const auto   f   = detail::gram_factor(AK, zeta);

    LeverageScores out;
    out.method      = leverage_method::hrn_exact;
    out.k           = f.k;
    out.subset      = sel.subset;
    out.params.zeta = zeta;
    out.params.seed = seed;
    out.scores      = f.k > 0 ? product_row_norms(AK, f.X) : std::vector<double>(static_cast<std::size_t>(A.rows()), 0.0);
    return out;
}

//
// Pi_2 applied on the right of X (k x k): X Pi_2 = (S X^T)^T with S an
// embedding of R^k. Gaussian S is normalized by 1/sqrt(m).
//
inline DenseMatrix apply_right_jlt(const DenseMatrix & X, const SketchSpec & spec) {
    const DenseMatrix Xt = X.transpose();
    DenseMatrix       S;
    switch (spec.kind) {
    case sketch_kind::gaussian:
        S = apply_gaussian(Xt, spec.m, spec.seed) / std::sqrt(static_cast<double>(spec.m));
        break;
    case sketch_kind::srht:
        S = apply_srht(Xt, spec.m, spec.seed);
        break;
    case sketch_kind::identity:
        return X;
    default:
        throw usage_error("Pi_2 must be a gaussian, srht or identity sketch");
    }
    return S.transpose();
}

//
// Scores of A_K (assumed full column rank) from the SVD of the normalized
// sketch Pi_1 A_K: X = V Sigma^{-1}, optionally times Pi_2.
//
inline LeverageScores leverage_sketched(const SparseMatrix & AK, const SketchSpec & pi1,
                                        const std::optional<SketchSpec> & pi2 = std::nullopt,
                                        std::size_t memory_budget = default_memory_budget) {
    const index_t k = AK.cols();
    LeverageScores out;
    out.method      = leverage_method::sketched;
    out.params.pi1  = pi1.resolved(AK.rows(), std::max<index_t>(k, 1));
    out.params.seed = pi1.seed;
    out.params.eps  = pi1.eps;
    out.k           = k;
    if (k == 0) {
        out.scores.assign(static_cast<std::size_t>(AK.rows()), 0.0);
        return out;
    }

    const DenseMatrix At = apply_embedding(AK, pi1, memory_budget);
    if (At.rows() < k)
        throw rank_deficient_error("sketch has fewer rows (" + std::to_string(At.rows()) + ") than columns (" +
                                   std::to_string(k) + ")");
    const DenseSVD svd = dense_svd(At);
    const double   tiny = static_cast<double>(std::max(At.rows(), k)) * std::numeric_limits<double>::epsilon() * svd.sigma[0];
    if (!(svd.sigma[k - 1] > tiny))
        throw rank_deficient_error("sketched matrix is numerically rank deficient (sigma_min/sigma_max = " +
                                   std::to_string(svd.sigma[0] > 0 ? svd.sigma[k - 1] / svd.sigma[0] : 0.0) +
                                   "); run column selection first (hrn_approx)");
    DenseMatrix X = svd.V * svd.sigma.cwiseInverse().asDiagonal();
    if (pi2) {
        SketchSpec s2 = *pi2;
        if (s2.kind == sketch_kind::gaussian && s2.m == 0)
            s2.m = gaussian_jlt_rows(std::max<index_t>(AK.rows(), 2), s2.eps);
        out.params.pi2 = s2;
        X              = apply_right_jlt(X, s2);
    }
    out.scores = product_row_norms(AK, X);
    return out;
}

//
// Pi_1 for an eps-accurate estimate on an n x k matrix: CountGauss with
// r = countsketch_rows(k, eps, delta) and
// m = min(r, max(2k, gaussian_jlt_rows(n, eps))).
//
inline SketchSpec accurate_countgauss_spec(index_t n, index_t k, double eps, double delta, std::uint64_t seed) {
    SketchSpec s;
    s.kind  = sketch_kind::countgauss;
    s.eps   = eps;
    s.delta = delta;
    s.seed  = seed;
    s.r     = countsketch_rows(k, eps, delta);
    s.m     = std::min(s.r, std::max<index_t>(2 * k, gaussian_jlt_rows(std::max<index_t>(n, 2), eps)));
    return s;
}

inline LeverageScores leverage_hrn_approx(const SparseMatrix & A, double zeta = default_rcond, double eps = default_eps,
                                          std::uint64_t seed = default_seed, const CountGaussOptions & opts = {}) {
    const auto sel = countgauss_srrqr(A, selection_gamma, selection_eps, selection_delta, zeta, seed, opts);
    const auto AK  = select_columns(A, sel.subset.perm);
    const auto k   = sel.subset.k;

    LeverageScores out;
    if (k == 0) {
        out.scores.assign(static_cast<std::size_t>(A.rows()), 0.0);
    } else {
        const SketchSpec          pi1 = accurate_countgauss_spec(A.rows(), k, eps, selection_delta, derive_seed(seed, 1));
        std::optional<SketchSpec> pi2;
        const index_t             jlt = gaussian_jlt_rows(std::max<index_t>(A.rows(), 2), eps);
        if (jlt < k)
            pi2 = SketchSpec{sketch_kind::gaussian, jlt, 0, derive_seed(seed, 2), eps, selection_delta, default_gamma};
        out = leverage_sketched(AK, pi1, pi2, opts.memory_budget);
    }
    out.method      = leverage_method::hrn_approx;
    out.k           = k;
    out.subset      = sel.subset;
    out.params.zeta = zeta;
    out.params.eps  = eps;
    out.params.seed = seed;
    return out;
}

// (sqrt(theta_k) + sqrt(theta_tilde)) (sigma_{k+1}/sigma_k) times the
// product of the bound factors.
inline double hrn_exact_bound(double theta_k, double theta_tilde, double sigma_k, double sigma_k1, double factor_product) {
    if (!(sigma_k > 0.0))
        throw usage_error("hrn_exact_bound: sigma_k must be positive");
    return (std::sqrt(std::max(theta_k, 0.0)) + std::sqrt(std::max(theta_tilde, 0.0))) * (sigma_k1 / sigma_k) *
           factor_product;
}

inline double hrn_exact_bound(double theta_k, double theta_tilde, double sigma_k, double sigma_k1, index_t k, index_t m,
                              index_t d, double alpha, double eps, double phi) {
    return hrn_exact_bound(theta_k, theta_tilde, sigma_k, sigma_k1, bound_factors(k, m, d, alpha, eps, phi).product());
}

// Default eps_tilde for the approximate bound.
inline double combined_eps(double eps1, double eps2) { return eps1 + eps2 + eps1 * eps2; }

inline double hrn_approx_bound(double eps_tilde, double theta_k, double theta_tilde, double sigma_k, double sigma_k1,
                               double factor_product) {
    return eps_tilde * theta_k + (1.0 + eps_tilde) * hrn_exact_bound(theta_k, theta_tilde, sigma_k, sigma_k1, factor_product);
}

inline double hrn_approx_bound(double eps_tilde, double theta_k, double theta_tilde, double sigma_k, double sigma_k1,
                               index_t k, index_t m, index_t d, double alpha, double eps, double phi) {
    return hrn_approx_bound(eps_tilde, theta_k, theta_tilde, sigma_k, sigma_k1, bound_factors(k, m, d, alpha, eps, phi).product());
}

inline LeverageScores compute_leverage(const SparseMatrix & A, leverage_method method, const LeverageParams & p) {
    switch (method) {
    case leverage_method::gram_svd: return leverage_gram_svd(A, p.zeta);
    case leverage_method::spqr: return leverage_spqr(A, p.zeta);
    case leverage_method::hrn_exact: return leverage_hrn_exact(A, p.zeta, p.seed);
    case leverage_method::hrn_approx: return leverage_hrn_approx(A, p.zeta, p.eps, p.seed);
    case leverage_method::sketched: {
        SketchSpec pi1 = p.pi1 ? *p.pi1 : SketchSpec{};
        if (!p.pi1) {
            pi1.seed = p.seed;
            pi1.eps  = p.eps;
        }
        return leverage_sketched(A, pi1, p.pi2);
    }
    }
    throw usage_error("unknown leverage method");
}

} // namespace lspack
