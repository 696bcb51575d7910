#pragma once
// Independent reference computations for the unit and acceptance tests.
// Everything here goes through dense Eigen routines (JacobiSVD, plain
// products) rather than the library code paths under test.

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <lspack/lspack.hpp>

namespace oracle {

using lspack::DenseMatrix;
using lspack::index_t;

inline Eigen::MatrixXd dense(const lspack::SparseMatrix & A) { return A.to_dense(); }

// Triple loop A^T A.
inline Eigen::MatrixXd naive_gram(const Eigen::MatrixXd & A) {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(A.cols(), A.cols());
    for (index_t i = 0; i < A.cols(); ++i)
        for (index_t j = 0; j < A.cols(); ++j) {
            double s = 0.0;
            for (index_t r = 0; r < A.rows(); ++r)
                s += A(r, i) * A(r, j);
            B(i, j) = s;
        }
    return B;
}

struct ThinSVD {
    Eigen::MatrixXd U;
    Eigen::VectorXd s;
    Eigen::MatrixXd V;
};

inline ThinSVD svd(const Eigen::MatrixXd & A) {
    Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::ColPivHouseholderQRPreconditioner> j(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {j.matrixU(), j.singularValues(), j.matrixV()};
}

// theta_i(A_k) = ||U_{i,1:k}||^2.
inline std::vector<double> leverage(const Eigen::MatrixXd & A, index_t k) {
    const auto          f = svd(A);
    std::vector<double> t(static_cast<std::size_t>(A.rows()));
    for (index_t i = 0; i < A.rows(); ++i)
        t[static_cast<std::size_t>(i)] = f.U.row(i).head(k).squaredNorm();
    return t;
}

// Full-rank scores.
inline std::vector<double> leverage(const Eigen::MatrixXd & A) { return leverage(A, A.cols()); }

// Numerical rank by strict cutoff on dense singular values.
inline index_t rank(const Eigen::MatrixXd & A, double zeta) {
    const auto s = svd(A).s;
    index_t    k = 0;
    for (index_t j = 0; j < s.size(); ++j)
        k += s[j] > zeta * s[0];
    return k;
}

inline double kappa(const Eigen::MatrixXd & M) {
    const auto s = svd(M).s;
    return s[0] / s[s.size() - 1];
}

// Explicit r x n CountSketch matrix.
inline Eigen::MatrixXd countsketch_matrix(const lspack::CountSketchPlan & p) {
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(p.out_rows, p.in_rows());
    for (index_t i = 0; i < p.in_rows(); ++i)
        S(p.hash_targets[static_cast<std::size_t>(i)], i) = p.signs[static_cast<std::size_t>(i)];
    return S;
}

// Sylvester Hadamard matrix, entries +-1 (unnormalized).
inline Eigen::MatrixXd hadamard(index_t p) {
    Eigen::MatrixXd H = Eigen::MatrixXd::Ones(1, 1);
    while (H.rows() < p) {
        const index_t   h = H.rows();
        Eigen::MatrixXd N(2 * h, 2 * h);
        N << H, H, H, -H;
        H = N;
    }
    return H;
}

inline double max_abs_diff(const std::vector<double> & a, const std::vector<double> & b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double sum(const std::vector<double> & a) {
    double s = 0.0;
    for (double v : a)
        s += v;
    return s;
}

// n x d, rank k: k sparse columns followed by d - k random combinations.
inline Eigen::MatrixXd replicated_rank(index_t n, index_t d, index_t k, std::uint64_t seed) {
    const Eigen::MatrixXd base = lspack::random_sparse(n, k, 2, seed).to_dense();
    const Eigen::MatrixXd coef = lspack::gaussian_matrix(k, d - k, seed, lspack::stream_role::jlt);
    Eigen::MatrixXd       M(n, d);
    M << base, base * coef;
    return M;
}

} // namespace oracle
