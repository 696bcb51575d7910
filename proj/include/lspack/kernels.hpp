#pragma once
//
// Row-driven kernels on CSR matrices whose cost is governed by nnz and nnz2.
//

#include <cmath>
#include <vector>

#include "matrix.hpp"
#include "parallel.hpp"

namespace lspack {

//
// B = A^T A accumulated as a sum of row outer products, each restricted to
// the row's nonzero pattern: O(nnz2(A)). Workers own private d x d
// accumulators (upper triangle only) merged at the end; the lower triangle
// is mirrored so the result is exactly symmetric.
//
inline DenseMatrix gram(const SparseMatrix & A) {
    const index_t n = A.rows();
    const index_t d = A.cols();
    const int     workers = static_cast<int>(std::min<index_t>(num_workers(), std::max<index_t>(n / 1024, 1)));

    std::vector<DenseMatrix> partial(static_cast<std::size_t>(workers), DenseMatrix::Zero(d, d));

#pragma omp parallel for num_threads(workers) schedule(static)
    for (index_t i = 0; i < n; ++i) {
        auto &     B = partial[static_cast<std::size_t>(worker_id())];
        const auto r = A.row(i);
        const auto k = r.size();
        for (std::size_t p = 0; p < k; ++p) {
            const double vp  = r.vals[p];
            double *     row = B.data() + static_cast<index_t>(r.cols[p]) * d;
            for (std::size_t q = p; q < k; ++q)
                row[r.cols[q]] += vp * r.vals[q];
        }
    }

    DenseMatrix B = std::move(partial[0]);
    for (std::size_t w = 1; w < partial.size(); ++w)
        B += partial[w];
    for (index_t i = 0; i < d; ++i)
        for (index_t j = 0; j < i; ++j)
            B(i, j) = B(j, i);
    return B;
}

enum class row_norm_strategy {
    automatic,
    direct,      // t = e_i^T A B, O(nnz(A_i,:) r) per row
    quadratic,   // e_i^T A (B B^T) A^T e_i, O(nnz(A_i,:)^2) per row
};

//
// Squared row norms ||e_i^T A B||^2 for all rows. The automatic strategy
// picks the cheaper evaluation by exact operation count:
// nnz(A) r  versus  nnz2(A) + d^2 r  (ties go to the quadratic form).
//
inline std::vector<double> product_row_norms(const SparseMatrix & A, const DenseMatrix & B,
                                             row_norm_strategy strategy = row_norm_strategy::automatic) {
    if (B.rows() != A.cols())
        throw usage_error("product_row_norms: B has " + std::to_string(B.rows()) + " rows, A has " +
                          std::to_string(A.cols()) + " columns");

    const index_t n = A.rows();
    const index_t d = A.cols();
    const index_t r = B.cols();

    if (strategy == row_norm_strategy::automatic) {
        const double direct_cost    = static_cast<double>(A.nnz()) * static_cast<double>(r);
        const double quadratic_cost = static_cast<double>(nnz2(A)) + static_cast<double>(d) * d * r;
        strategy = quadratic_cost <= direct_cost ? row_norm_strategy::quadratic : row_norm_strategy::direct;
    }

    std::vector<double> norms(static_cast<std::size_t>(n), 0.0);
    const int           workers = num_workers();

    if (strategy == row_norm_strategy::direct) {
#pragma omp parallel num_threads(workers)
        {
            Vector t(r);
#pragma omp for schedule(static)
            for (index_t i = 0; i < n; ++i) {
                const auto row = A.row(i);
                t.setZero();
                for (std::size_t p = 0; p < row.size(); ++p)
                    t.noalias() += row.vals[p] * B.row(row.cols[p]).transpose();
                norms[static_cast<std::size_t>(i)] = t.squaredNorm();
            }
        }
    } else {
        const DenseMatrix C = B * B.transpose();
#pragma omp parallel for num_threads(workers) schedule(static)
        for (index_t i = 0; i < n; ++i) {
            const auto row = A.row(i);
            const auto k   = row.size();
            double     s   = 0.0;
            for (std::size_t p = 0; p < k; ++p) {
                const double * crow = C.data() + static_cast<index_t>(row.cols[p]) * d;
                double         inner = 0.0;
                for (std::size_t q = 0; q < k; ++q)
                    inner += crow[row.cols[q]] * row.vals[q];
                s += row.vals[p] * inner;
            }
            norms[static_cast<std::size_t>(i)] = std::abs(s);
        }
    }
    return norms;
}

// A B for dense B (d x r).
inline DenseMatrix multiply(const SparseMatrix & A, const DenseMatrix & B) {
    if (B.rows() != A.cols())
        throw usage_error("multiply: inner dimensions differ");
    DenseMatrix C = DenseMatrix::Zero(A.rows(), B.cols());
#pragma omp parallel for num_threads(num_workers()) schedule(static)
    for (index_t i = 0; i < A.rows(); ++i) {
        const auto row = A.row(i);
        for (std::size_t p = 0; p < row.size(); ++p)
            C.row(i).noalias() += row.vals[p] * B.row(row.cols[p]);
    }
    return C;
}

// y = A x
inline Vector multiply(const SparseMatrix & A, const Vector & x) {
    if (x.size() != A.cols())
        throw usage_error("multiply: vector length differs from column count");
    Vector y(A.rows());
#pragma omp parallel for num_threads(num_workers()) schedule(static)
    for (index_t i = 0; i < A.rows(); ++i) {
        const auto row = A.row(i);
        double     s   = 0.0;
        for (std::size_t p = 0; p < row.size(); ++p)
            s += row.vals[p] * x[row.cols[p]];
        y[i] = s;
    }
    return y;
}

// y = A^T x, sequential scatter (deterministic).
inline Vector multiply_transpose(const SparseMatrix & A, const Vector & x) {
    if (x.size() != A.rows())
        throw usage_error("multiply_transpose: vector length differs from row count");
    Vector y = Vector::Zero(A.cols());
    for (index_t i = 0; i < A.rows(); ++i) {
        const double xi = x[i];
        if (xi == 0.0)
            continue;
        const auto row = A.row(i);
        for (std::size_t p = 0; p < row.size(); ++p)
            y[row.cols[p]] += row.vals[p] * xi;
    }
    return y;
}

} // namespace lspack
