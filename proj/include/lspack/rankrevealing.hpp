#pragma once
//
// Pivoted QR (Businger-Golub), numerical rank detection and column subset
// selection on a CountGauss sketch.
//

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "matrix.hpp"
#include "sketch.hpp"

namespace lspack {

struct PivotedQR {
    std::vector<index_t> perm;   // column j of B P is column perm[j] of B
    DenseMatrix          R;      // min(m,d) x d, upper triangular
    std::vector<double>  diag;   // R_jj, j < min(m,d)
};

//
// Householder QR with column pivoting: at each step the remaining column of
// largest norm is brought forward (ties to the lowest index). Column norms
// are downdated and recomputed when cancellation makes the downdate
// unreliable, as in LAPACK xGEQP3.
//
inline PivotedQR pivoted_qr(const DenseMatrix & B) {
    const index_t m = B.rows();
    const index_t d = B.cols();
    const index_t p = std::min(m, d);

    Eigen::MatrixXd      W = B;
    std::vector<index_t> perm(static_cast<std::size_t>(d));
    std::iota(perm.begin(), perm.end(), 0);
    Eigen::VectorXd norms(d), ref(d);
    for (index_t j = 0; j < d; ++j)
        norms[j] = ref[j] = W.col(j).norm();
    const double tol = std::sqrt(std::numeric_limits<double>::epsilon());

    for (index_t j = 0; j < p; ++j) {
        index_t piv = j;
        for (index_t c = j + 1; c < d; ++c)
            if (norms[c] > norms[piv])
                piv = c;
        if (piv != j) {
            W.col(j).swap(W.col(piv));
            std::swap(norms[j], norms[piv]);
            std::swap(ref[j], ref[piv]);
            std::swap(perm[static_cast<std::size_t>(j)], perm[static_cast<std::size_t>(piv)]);
        }

        auto         x     = W.col(j).tail(m - j);
        const double alpha = x.norm();
        // Already reduced: H = I, as in LAPACK xLARFG.
        if (alpha > 0.0 && x.tail(m - j - 1).squaredNorm() > 0.0) {
            const double beta = x[0] >= 0.0 ? -alpha : alpha;
            Eigen::VectorXd v = x;
            v[0] -= beta;
            const double vnorm2 = v.squaredNorm();
            if (vnorm2 > 0.0) {
                for (index_t c = j + 1; c < d; ++c) {
                    auto         y = W.col(c).tail(m - j);
                    const double s = 2.0 * v.dot(y) / vnorm2;
                    y -= s * v;
                }
            }
            x.setZero();
            x[0] = beta;
        }

        for (index_t c = j + 1; c < d; ++c) {
            if (norms[c] == 0.0)
                continue;
            double t = std::abs(W(j, c)) / norms[c];
            t        = std::max(0.0, (1.0 + t) * (1.0 - t));
            const double t2 = t * (norms[c] / ref[c]) * (norms[c] / ref[c]);
            if (t2 <= tol) {
                norms[c] = W.col(c).tail(m - j - 1).norm();
                ref[c]   = norms[c];
            } else {
                norms[c] *= std::sqrt(t);
            }
        }
    }

    PivotedQR out;
    out.perm = std::move(perm);
    out.R    = DenseMatrix::Zero(p, d);
    for (index_t i = 0; i < p; ++i)
        for (index_t c = i; c < d; ++c)
            out.R(i, c) = W(i, c);
    out.diag.resize(static_cast<std::size_t>(p));
    for (index_t i = 0; i < p; ++i)
        out.diag[static_cast<std::size_t>(i)] = W(i, i);
    return out;
}

enum class rank_method { qr_diag, svd_cutoff };

inline std::string to_string(rank_method m) { return m == rank_method::qr_diag ? "qr_diag" : "svd_cutoff"; }

struct RankReport {
    index_t             k      = 0;
    rank_method         method = rank_method::svd_cutoff;
    double              cutoff = 0.0;
    std::vector<double> values;   // |R_jj| or sigma_j used for the decision
    // Smallest j (1-based) with v_{j+1}/v_j <= cutoff sqrt(j (d-j)); recorded only.
    std::optional<index_t> gap_index;
};

inline constexpr double default_rcond = 1e-10;

// Number of j with |R_jj| >= zeta |R_11|. Throws if |diag| increases.
inline index_t detect_rank_qr(std::span<const double> diag, double zeta) {
    if (diag.empty())
        return 0;
    const double first = std::abs(diag[0]);
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() * first;
    for (std::size_t j = 1; j < diag.size(); ++j)
        if (std::abs(diag[j]) > std::abs(diag[j - 1]) * (1.0 + 1e-8) + slack)
            throw usage_error("detect_rank_qr: |diag(R)| must be non-increasing (entry " + std::to_string(j) + ")");
    if (first == 0.0)
        return 0;
    return std::count_if(diag.begin(), diag.end(), [&](double v) { return std::abs(v) >= zeta * first; });
}

// Number of j with sigma_j > zeta sigma_1.
inline index_t detect_rank_svd(std::span<const double> sigma, double zeta) {
    if (sigma.empty() || !(sigma[0] > 0.0))
        return 0;
    for (std::size_t j = 1; j < sigma.size(); ++j)
        if (sigma[j] > sigma[j - 1] || sigma[j] < 0.0)
            throw usage_error("detect_rank_svd: sigma must be non-negative and non-increasing");
    return std::count_if(sigma.begin(), sigma.end(), [&](double s) { return s > zeta * sigma[0]; });
}

inline std::optional<index_t> gap_ratio_index(std::span<const double> values, double zeta) {
    const auto d = static_cast<index_t>(values.size());
    for (index_t j = 1; j < d; ++j) {
        const double vj = std::abs(values[static_cast<std::size_t>(j - 1)]);
        if (vj == 0.0)
            break;
        const double ratio = std::abs(values[static_cast<std::size_t>(j)]) / vj;
        if (ratio <= zeta * std::sqrt(static_cast<double>(j * (d - j))))
            return j;
    }
    return std::nullopt;
}

// Thin SVD of a dense m x d (m >= d) matrix: singular values and V (d x d).
struct DenseSVD {
    Eigen::VectorXd sigma;
    Eigen::MatrixXd V;
};

inline DenseSVD dense_svd(const DenseMatrix & B) {
    Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::ColPivHouseholderQRPreconditioner> svd(Eigen::MatrixXd(B), Eigen::ComputeFullV);
    return {svd.singularValues(), svd.matrixV()};
}

inline std::span<const double> as_span(const Eigen::VectorXd & v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

struct ColumnSubset {
    std::vector<index_t> perm;   // selected columns of A, pivot order
    index_t              k = 0;
    DenseMatrix          R_k;    // k x k upper triangular
    std::vector<double>  diag_R;
};

struct SubsetSelection {
    ColumnSubset subset;
    RankReport   rank;
};

//
// Rank and column subset from a sketch B = Phi A. The QR diagonal decides
// when the last retained ratio |R_kk|/|R_11| is at least 10 zeta (a clean
// gap); otherwise the singular values of B decide and the QR supplies the
// first k pivots.
//
inline SubsetSelection select_columns_from_sketch(const DenseMatrix & B, double zeta) {
    SubsetSelection out;
    auto &          rep = out.rank;
    rep.cutoff          = zeta;
    if (B.cols() == 0 || B.rows() == 0)
        return out;

    const PivotedQR qr = pivoted_qr(B);
    index_t         k  = detect_rank_qr(qr.diag, zeta);
    const double    r1 = std::abs(qr.diag.front());
    const bool      clean = r1 == 0.0 || (k > 0 && std::abs(qr.diag[static_cast<std::size_t>(k - 1)]) >= 10.0 * zeta * r1);

    if (clean) {
        rep.method = rank_method::qr_diag;
        for (double v : qr.diag)
            rep.values.push_back(std::abs(v));
    } else {
        const DenseSVD svd = dense_svd(B);
        k                  = detect_rank_svd(as_span(svd.sigma), zeta);
        rep.method         = rank_method::svd_cutoff;
        rep.values.assign(svd.sigma.data(), svd.sigma.data() + svd.sigma.size());
    }
    rep.k         = k;
    rep.gap_index = gap_ratio_index(rep.values, zeta);

    auto & sub  = out.subset;
    sub.k       = k;
    sub.perm.assign(qr.perm.begin(), qr.perm.begin() + k);
    sub.R_k     = qr.R.topLeftCorner(k, k);
    sub.diag_R  = qr.diag;
    return out;
}

inline SubsetSelection countgauss_srrqr(const SparseMatrix & A, double gamma, double eps, double delta, double zeta,
                                        std::uint64_t seed, const CountGaussOptions & opts = {}) {
    if (A.rows() < A.cols())
        throw usage_error("countgauss_srrqr: need n >= d (transpose the input)");
    return select_columns_from_sketch(countgauss_sketch(A, gamma, delta, eps, seed, opts), zeta);
}

// Same selection on an arbitrary sketch (e.g. plain Gaussian G A).
inline SubsetSelection sketch_srrqr(const SparseMatrix & A, const SketchSpec & spec, double zeta) {
    if (A.rows() < A.cols())
        throw usage_error("sketch_srrqr: need n >= d (transpose the input)");
    return select_columns_from_sketch(sketch(A, spec), zeta);
}

// alpha with exp(-alpha^2 m / 2) = failure.
inline double alpha_for_failure(index_t m, double failure = 0.01) {
    if (m < 1 || !(failure > 0.0 && failure < 1.0))
        throw usage_error("alpha_for_failure: need m >= 1 and failure in (0,1)");
    return std::sqrt(2.0 * std::log(1.0 / failure) / static_cast<double>(m));
}

struct BoundFactors {
    double xi  = 1.0;
    double eta = 1.0;
    double rho = 1.0;

    double product() const { return xi * eta * rho; }
};

inline double xi_factor(double alpha, index_t k, index_t m) {
    if (m < 1 || k < 0)
        throw usage_error("xi_factor: need m >= 1");
    const double s = std::sqrt(static_cast<double>(k) / static_cast<double>(m));
    if (!(alpha > 0.0 && alpha < 1.0 - s))
        throw usage_error("alpha = " + std::to_string(alpha) + " outside (0, 1 - sqrt(k/m)) = (0, " +
                          std::to_string(1.0 - s) + ")");
    return (1.0 + alpha + s) / (1.0 - alpha - s);
}

inline double eta_factor(double eps) {
    if (!(eps >= 0.0 && eps < 1.0))
        throw usage_error("eps must lie in [0,1)");
    return (1.0 + eps) / (1.0 - eps);
}

inline double rho_factor(double phi, index_t k, index_t d) {
    if (!(phi >= 1.0))
        throw usage_error("phi must be at least 1");
    if (k > d)
        throw usage_error("rho_factor: k exceeds d");
    return std::sqrt(1.0 + phi * phi * static_cast<double>(k) * static_cast<double>(d - k));
}

inline BoundFactors bound_factors(index_t k, index_t m, index_t d, double alpha, double eps, double phi) {
    return {xi_factor(alpha, k, m), eta_factor(eps), rho_factor(phi, k, d)};
}

// Guaranteed fraction sigma_k(R_k) / sigma_k(A) > 1/(xi eta rho).
inline double subset_sigma_min_bound(index_t k, index_t m, index_t d, double alpha, double eps, double phi) {
    return 1.0 / bound_factors(k, m, d, alpha, eps, phi).product();
}

} // namespace lspack
